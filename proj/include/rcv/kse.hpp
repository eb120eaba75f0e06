#pragma once
#include <cstdint>

#include <Eigen/Core>

#include "rcv/field_series.hpp"

namespace rcv {

// u_t = -u u_x - u_xx - u_xxxx, periodic on [0, L]
struct KseParams {
    double domain_length = 22.0;
    int x_points = 64;          // power of two (FFT-friendly)
    double dt = 0.25;           // sampling step
    double integrate_dt = 0.025;  // internal ETDRK4 step (dt must be a multiple)
    double transient_time = 2000.0;  // discarded before the first sample
    double lyapunov_max = 0.05; // configuration constant (not computed here)
    uint64_t seed = 0;          // initial-condition seed
};

// Integrates from a seeded smooth random initial condition, discards the
// transient, then returns x_points x total_samples (sample 0 = first state
// after the transient). Throws NumericalError if the field loses finiteness.
Eigen::MatrixXd solve_kse(const KseParams& p, long total_samples);

// Same, but starting from a caller-supplied state with no transient; used by
// the self-convergence tests.
Eigen::MatrixXd solve_kse_from(const KseParams& p, const Eigen::VectorXd& u0,
                               long total_samples);

FieldSeries generate_kse(const KseParams& p, long total_samples);

} // namespace rcv
