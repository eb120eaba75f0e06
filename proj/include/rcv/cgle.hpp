#pragma once
#include <cstdint>

#include <Eigen/Core>

#include "rcv/field_series.hpp"

namespace rcv {

// u_t = u + (1 + i alpha) u_xx - (1 + i beta) |u|^2 u, periodic on [-9, 9]
struct CglParams {
    double alpha_disp = 2.0;
    double beta_disp = -2.0;
    double domain_length = 18.0;  // x in [-9, 9]
    int x_points = 32;
    double integrate_dt = 1e-4;
    double sample_dt = 0.07;      // integer multiple of integrate_dt (700x)
    double transient_time = 60.0;
    double lyapunov_max = 0.22;
    uint64_t seed = 0;
};

Eigen::MatrixXcd solve_cgle(const CglParams& p, long total_samples);

// From a caller-supplied state, no transient (convergence tests).
Eigen::MatrixXcd solve_cgle_from(const CglParams& p, const Eigen::VectorXcd& u0,
                                 long total_samples);

// RealImagSplit encoding by default (M = 2 * x_points); Magnitude is the
// documented phase-blind alternative.
FieldSeries generate_cgle(const CglParams& p, long total_samples, Encoding enc);

} // namespace rcv
