#pragma once
#include <complex>

#include <Eigen/Core>

namespace rcv {

// Cox-Matthews ETDRK4 coefficients for step h over the diagonal (Fourier)
// linear symbol L. The phi-functions are evaluated by averaging over a unit
// contour around each h*L_k, which sidesteps the removable singularities at
// small |h*L_k|.
//
// Real symbols (KSE): mean over the upper half circle, real part taken (the
// lower half is implied by conjugate symmetry).
// Complex symbols (CGLE): mean over the FULL circle, no real part. Using the
// half circle for a complex symbol is wrong — the half-circle average equals
// the center value only together with its conjugate reflection — and the
// scheme silently degrades to first order.
//
// Usage per step, N the nonlinear term in Fourier space:
//   a = E2 v + Q N(v);  b = E2 v + Q N(a);  c = E2 a + Q (2 N(b) - N(v))
//   v <- E v + f1 N(v) + 2 f2 (N(a)+N(b)) + f3 N(c)
struct Etdrk4CoeffsReal {
    Eigen::ArrayXd E, E2, Q, f1, f2, f3;
};
struct Etdrk4Coeffs {
    Eigen::ArrayXcd E, E2, Q, f1, f2, f3;
};

Etdrk4CoeffsReal etdrk4_coeffs_real(const Eigen::ArrayXd& L, double h,
                                    int contour_points = 32);
Etdrk4Coeffs etdrk4_coeffs_complex(const Eigen::ArrayXcd& L, double h,
                                   int contour_points = 32);

} // namespace rcv
