#include "rcv/etdrk4.hpp"

#include <cmath>

namespace rcv {

using cd = std::complex<double>;

namespace {

// the four phi-like integrands of the scheme
inline cd ig_q(cd z)  { return (std::exp(z / 2.0) - 1.0) / z; }
inline cd ig_f1(cd z) { return (-4.0 - z + std::exp(z) * (4.0 - 3.0 * z + z * z)) / (z * z * z); }
inline cd ig_f2(cd z) { return (2.0 + z + std::exp(z) * (-2.0 + z)) / (z * z * z); }
inline cd ig_f3(cd z) { return (-4.0 - 3.0 * z - z * z + std::exp(z) * (4.0 - z)) / (z * z * z); }

} // namespace

Etdrk4CoeffsReal etdrk4_coeffs_real(const Eigen::ArrayXd& L, double h, int M) {
    const long n = L.size();
    Etdrk4CoeffsReal c;
    c.E = (h * L).exp();
    c.E2 = (h * L / 2.0).exp();
    c.Q.resize(n); c.f1.resize(n); c.f2.resize(n); c.f3.resize(n);
    for (long i = 0; i < n; ++i) {
        cd q(0), f1(0), f2(0), f3(0);
        for (int j = 1; j <= M; ++j) {
            const cd r = std::exp(cd(0, M_PI * (j - 0.5) / M));  // upper half circle
            const cd z = h * L(i) + r;
            q += ig_q(z); f1 += ig_f1(z); f2 += ig_f2(z); f3 += ig_f3(z);
        }
        c.Q(i)  = h * q.real()  / M;
        c.f1(i) = h * f1.real() / M;
        c.f2(i) = h * f2.real() / M;
        c.f3(i) = h * f3.real() / M;
    }
    return c;
}

Etdrk4Coeffs etdrk4_coeffs_complex(const Eigen::ArrayXcd& L, double h, int M) {
    const long n = L.size();
    Etdrk4Coeffs c;
    c.E = (h * L).exp();
    c.E2 = (h * L / 2.0).exp();
    c.Q.resize(n); c.f1.resize(n); c.f2.resize(n); c.f3.resize(n);
    for (long i = 0; i < n; ++i) {
        cd q(0), f1(0), f2(0), f3(0);
        for (int j = 1; j <= M; ++j) {
            const cd r = std::exp(cd(0, 2.0 * M_PI * (j - 0.5) / M));  // full circle
            const cd z = h * L(i) + r;
            q += ig_q(z); f1 += ig_f1(z); f2 += ig_f2(z); f3 += ig_f3(z);
        }
        c.Q(i)  = h * q  / double(M);
        c.f1(i) = h * f1 / double(M);
        c.f2(i) = h * f2 / double(M);
        c.f3(i) = h * f3 / double(M);
    }
    return c;
}

} // namespace rcv
