#pragma once
#include <complex>
#include <functional>

#include <Eigen/Core>

#include "rcv/field_series.hpp"

namespace rcv {

// Focusing NLSE in the normalization used throughout:
//   i psi_x + (1/2) psi_tt + |psi|^2 psi = 0
// x is the propagation variable, t the transverse one.

struct NlseParams {
    double a = 0.25;       // breather parameter
    double a1 = 0.0, a2 = 0.0;  // collision parameters
    int x_points = 64;     // transverse grid size
    double dt = 0.0;       // marching step (defaults per state if 0)
    bool role_swap = false;  // Kuznetsov-Ma: exchange t and x roles
};

// Two published forms of the breather formula. They differ in the prefactor
// of the cosine in the denominator AND in the frequency; only one of them
// actually solves the equation, and the residual oracle picks it at runtime
// rather than trusting any transcription.
enum class BreatherVariant { Printed, Standard };

// Pointwise breather evaluation (complex arithmetic; a > 1/2 gives the
// Kuznetsov-Ma regime where b and omega turn imaginary).
std::complex<double> breather_value(double a, BreatherVariant v, double x, double t);

// Pointwise two-breather collision (nonlinear superposition), parameters
// 0 < a1, a2 < 1/2, a1 != a2.
std::complex<double> collision_value(double a1, double a2, double x, double t);

// Complex field on: channels = transverse grid (x for breathers, t for the
// role-swapped KM case), columns = marching samples. march0 is the first
// marching coordinate. Throws NumericalError on an analytic pole
// (|denominator| < 1e-14 at a grid point).
Eigen::MatrixXcd breather_field(const NlseParams& p, long steps, BreatherVariant v,
                                double march0 = 0.0);
Eigen::MatrixXcd collision_field(const NlseParams& p, long steps, double march0);

// Max |i psi_x + 1/2 psi_tt + |psi|^2 psi| with a spectral second derivative
// along the transverse window [t0, t0+period) on nt points and a 4th-order
// finite difference for psi_x, evaluated at the given x positions.
double nlse_residual_max(const std::function<std::complex<double>(double, double)>& psi,
                         const std::vector<double>& xs, double t0, double period, int nt);

// Transverse window for the residual oracle: one modulation period for
// a < 1/2, a wide centered window for the t-localized Kuznetsov-Ma case.
void breather_residual_window(double a, BreatherVariant v, double& t0,
                              double& period);

// Smallest common t-period of the two-breather solution. Requires the two
// modulation frequencies to be commensurate (they are for the parameter
// pairs used anywhere in this repo); throws UsageError otherwise.
double collision_common_period(double a1, double a2);

// Runs the oracle on both breather variants and returns the one that
// satisfies the equation (smaller residual by orders of magnitude).
BreatherVariant select_breather_variant(double a);

// High-level generators used by the CLI and sweep harness. steps columns,
// Magnitude encoding by default (enc switchable).
FieldSeries generate_breather(const NlseParams& p, long steps, Encoding enc,
                              BreatherVariant v);
FieldSeries generate_collision(const NlseParams& p, long steps, Encoding enc);

} // namespace rcv
