#pragma once
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/SparseCore>

namespace rcv {

enum class TopologyKind { DirectedRandom, UndirectedRandom, SmallWorld };

struct TopologySpec {
    TopologyKind kind = TopologyKind::DirectedRandom;
    int n = 0;                 // node count
    double avg_degree = 0.0;   // mean degree k
    double rewire_prob = 0.0;  // SmallWorld only
    uint64_t seed = 0;
};

// Edge list as generated; for undirected kinds each edge appears once with i<j.
struct EdgeList {
    std::vector<std::pair<int, int>> edges;
    int n = 0;
    bool undirected = false;
};

// Reservoir adjacency with its exact (post-scaling) spectral radius.
struct ReservoirNetwork {
    Eigen::SparseMatrix<double> weights;
    double spectral_radius = 0.0;
    TopologySpec spec;
};

EdgeList generate_topology(const TopologySpec& spec);

Eigen::SparseMatrix<double> assign_weights(const EdgeList& edges, uint64_t seed);

// Largest |eigenvalue| via a dense solver. Intended for n <= 512 and as the
// test oracle at any size we can afford to densify.
double spectral_radius_dense(const Eigen::SparseMatrix<double>& m);

struct RadiusEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // ||A y - theta y|| of the accepted Ritz pair
};

// Certified block subspace iteration (block 8, Rayleigh-Ritz extraction).
// Plain power iteration oscillates on nonsymmetric matrices with complex or
// clustered leading pairs and can stabilize on a wrong value; the Ritz-pair
// residual check below refuses to return such estimates.
RadiusEstimate spectral_radius_iterative(const Eigen::SparseMatrix<double>& m,
                                         double rtol = 1e-8, int max_iters = 20000);

// Rescale so the spectral radius equals target_rho (exactly, by construction:
// multiply by target_rho/|lambda_max|). target_rho=0 gives the zero matrix.
// Throws NumericalError if the radius cannot be certified or is ~0.
ReservoirNetwork scale_to_spectral_radius(const Eigen::SparseMatrix<double>& m,
                                          const TopologySpec& spec, double target_rho);

// Convenience: generate + weight + scale in one call.
ReservoirNetwork build_reservoir(const TopologySpec& spec, double target_rho,
                                 uint64_t weight_seed);

// Text edge list: "# n=<n>", "# rho=<rho>", then "i j w" rows (0-based).
void export_edge_list(const ReservoirNetwork& net, std::ostream& out);

} // namespace rcv
