#include "rcv/topology.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <unordered_set>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "rcv/errors.hpp"
#include "rcv/rng.hpp"

namespace rcv {

EdgeList generate_topology(const TopologySpec& spec) {
    const int n = spec.n;
    const double k = spec.avg_degree;
    if (n < 1) throw UsageError("topology: n must be >= 1");
    if (k < 0) throw UsageError("topology: avg_degree must be >= 0");
    if (double(n) < k + 1.0) throw UsageError("topology: n < k+1, degree unrealizable");

    EdgeList out;
    out.n = n;
    Rng rng(spec.seed);

    switch (spec.kind) {
    case TopologyKind::DirectedRandom: {
        const double p = (n > 1) ? k / double(n - 1) : 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                if (rng.uniform() < p) out.edges.emplace_back(i, j);
            }
        break;
    }
    case TopologyKind::UndirectedRandom: {
        out.undirected = true;
        const double p = (n > 1) ? k / double(n - 1) : 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < p) out.edges.emplace_back(i, j);
        break;
    }
    case TopologyKind::SmallWorld: {
        out.undirected = true;
        const int ki = int(k);
        if (ki != k || ki % 2 != 0)
            throw UsageError("topology: small-world avg_degree must be an even integer");
        if (spec.rewire_prob < 0.0 || spec.rewire_prob > 1.0)
            throw UsageError("topology: rewire_prob must be in [0,1]");
        // Watts-Strogatz: ring lattice, each clockwise edge rewired with
        // probability rewire_prob to a uniform non-duplicate target.
        std::unordered_set<uint64_t> present;
        auto key = [n](int a, int b) {
            if (a > b) std::swap(a, b);
            return uint64_t(a) * uint64_t(n) + uint64_t(b);
        };
        std::vector<std::pair<int, int>> ring;
        for (int d = 1; d <= ki / 2; ++d)
            for (int i = 0; i < n; ++i) {
                int j = (i + d) % n;
                ring.emplace_back(i, j);
                present.insert(key(i, j));
            }
        for (auto& [i, j] : ring) {
            if (rng.uniform() < spec.rewire_prob) {
                // draw until we find a fresh target (excluding self and existing)
                for (int attempt = 0; attempt < 64 * n; ++attempt) {
                    int t = int(rng.uniform() * n);
                    if (t >= n) t = n - 1;
                    if (t == i || present.count(key(i, t))) continue;
                    present.erase(key(i, j));
                    present.insert(key(i, t));
                    j = t;
                    break;
                }
            }
            int a = std::min(i, j), b = std::max(i, j);
            out.edges.emplace_back(a, b);
        }
        break;
    }
    }
    return out;
}

Eigen::SparseMatrix<double> assign_weights(const EdgeList& edges, uint64_t seed) {
    Rng rng(seed);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(edges.edges.size() * (edges.undirected ? 2 : 1));
    for (const auto& [i, j] : edges.edges) {
        const double w = rng.uniform(-1.0, 1.0);
        trips.emplace_back(i, j, w);
        if (edges.undirected) trips.emplace_back(j, i, w);  // one draw per edge
    }
    Eigen::SparseMatrix<double> m(edges.n, edges.n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

double spectral_radius_dense(const Eigen::SparseMatrix<double>& m) {
    Eigen::MatrixXd dense(m);
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericalError("dense eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

RadiusEstimate spectral_radius_iterative(const Eigen::SparseMatrix<double>& m,
                                         double rtol, int max_iters) {
    const int n = int(m.rows());
    const int b = std::min(8, n);
    RadiusEstimate est;

    // fixed internal seed: the estimate must not depend on caller state
    Rng rng(0x5EED0FABu);
    Eigen::MatrixXd Q(n, b);
    for (int j = 0; j < b; ++j)
        for (int i = 0; i < n; ++i) Q(i, j) = rng.uniform(-1.0, 1.0);
    Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Q).householderQ() * Eigen::MatrixXd::Identity(n, b);

    Eigen::MatrixXd Z(n, b);
    for (int it = 1; it <= max_iters; ++it) {
        Z.noalias() = m * Q;
        if (it % 10 == 0 || it == max_iters) {
            // Rayleigh-Ritz on the current subspace
            Eigen::MatrixXd H = Q.transpose() * Z;  // b x b
            Eigen::EigenSolver<Eigen::MatrixXd> es(H, /*vectors=*/true);
            if (es.info() == Eigen::Success) {
                int best = 0;
                for (int j = 1; j < b; ++j)
                    if (std::abs(es.eigenvalues()(j)) > std::abs(es.eigenvalues()(best))) best = j;
                const std::complex<double> theta = es.eigenvalues()(best);
                Eigen::VectorXcd y = Q * es.eigenvectors().col(best);
                Eigen::VectorXcd Ay = m * y;
                const double res = (Ay - theta * y).norm() / y.norm();
                est.value = std::abs(theta);
                est.iterations = it;
                est.residual = res;
                if (res <= rtol * std::max(std::abs(theta), 1e-300)) {
                    est.converged = true;
                    return est;
                }
            }
        }
        Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Z).householderQ() * Eigen::MatrixXd::Identity(n, b);
    }
    return est;  // converged=false; caller decides what to do
}

ReservoirNetwork scale_to_spectral_radius(const Eigen::SparseMatrix<double>& m,
                                          const TopologySpec& spec, double target_rho) {
    if (target_rho < 0) throw UsageError("target spectral radius must be >= 0");
    ReservoirNetwork net;
    net.spec = spec;
    if (target_rho == 0.0) {
        net.weights = Eigen::SparseMatrix<double>(m.rows(), m.cols());
        net.spectral_radius = 0.0;
        return net;
    }

    double radius;
    if (m.rows() <= 512) {
        radius = spectral_radius_dense(m);
    } else {
        RadiusEstimate est = spectral_radius_iterative(m);
        if (!est.converged)
            throw NumericalError("spectral radius estimate did not converge (residual " +
                                 std::to_string(est.residual) + " after " +
                                 std::to_string(est.iterations) + " iterations)");
        radius = est.value;
    }
    if (radius < 1e-12)
        throw NumericalError("matrix spectral radius ~ 0; cannot scale to positive target");

    net.weights = m * (target_rho / radius);
    net.spectral_radius = target_rho;
    return net;
}

ReservoirNetwork build_reservoir(const TopologySpec& spec, double target_rho,
                                 uint64_t weight_seed) {
    EdgeList e = generate_topology(spec);
    Eigen::SparseMatrix<double> w = assign_weights(e, weight_seed);
    return scale_to_spectral_radius(w, spec, target_rho);
}

void export_edge_list(const ReservoirNetwork& net, std::ostream& out) {
    char buf[64];
    out << "# n=" << net.weights.rows() << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", net.spectral_radius);
    out << "# rho=" << buf << "\n";
    for (int k = 0; k < net.weights.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(net.weights, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%.17g", it.value());
            out << it.row() << " " << it.col() << " " << buf << "\n";
        }
}

} // namespace rcv
