#include "rcv/nlse.hpp"

#include <cmath>
#include <vector>

#include "rcv/errors.hpp"

namespace rcv {

using cd = std::complex<double>;
static constexpr cd I{0.0, 1.0};

std::complex<double> breather_value(double a, BreatherVariant v, double x, double t) {
    // b and omega via complex sqrt so a > 1/2 (Kuznetsov-Ma) works unchanged
    const cd b = std::sqrt(cd(8.0 * a * (1.0 - 2.0 * a)));
    cd omega, pref;
    if (v == BreatherVariant::Standard) {
        omega = 2.0 * std::sqrt(cd(1.0 - 2.0 * a));
        pref = std::sqrt(cd(2.0 * a));
    } else {  // Printed
        omega = std::sqrt(cd(2.0 * (1.0 - 2.0 * a)));
        pref = std::sqrt(cd(a));
    }
    const cd den = pref * std::cos(omega * t) - std::cosh(b * x);
    const cd num = 2.0 * (1.0 - 2.0 * a) * std::cosh(b * x) + I * b * std::sinh(b * x);
    return std::exp(I * x) * (1.0 + num / den);
}

static double breather_den_abs(double a, BreatherVariant v, double x, double t) {
    const cd b = std::sqrt(cd(8.0 * a * (1.0 - 2.0 * a)));
    const cd omega = (v == BreatherVariant::Standard)
                         ? 2.0 * std::sqrt(cd(1.0 - 2.0 * a))
                         : std::sqrt(cd(2.0 * (1.0 - 2.0 * a)));
    const cd pref = (v == BreatherVariant::Standard) ? std::sqrt(cd(2.0 * a))
                                                     : std::sqrt(cd(a));
    return std::abs(pref * std::cos(omega * t) - std::cosh(b * x));
}

std::complex<double> collision_value(double a1, double a2, double x, double t) {
    const cd l1 = I * std::sqrt(2.0 * a1);
    const cd l2 = I * std::sqrt(2.0 * a2);
    const cd k1 = 2.0 * std::sqrt(1.0 + l1 * l1);
    const cd k2 = 2.0 * std::sqrt(1.0 + l2 * l2);
    const cd x1 = 0.5 * std::acos(k1 / 2.0);
    const cd x2 = 0.5 * std::acos(k2 / 2.0);

    auto rs = [&](cd chi, cd kap, cd l, cd& r, cd& s) {
        const cd phase = kap * t - M_PI / 2.0 + l * kap * x;
        r = std::exp(-I * x / 2.0) *
            (std::exp(I * (2.0 * chi + phase) / 2.0) - std::exp(-I * (2.0 * chi + phase) / 2.0));
        s = std::exp(I * x / 2.0) *
            (std::exp(I * (-2.0 * chi + phase) / 2.0) + std::exp(-I * (-2.0 * chi + phase) / 2.0));
    };
    cd r1, s1, r2, s2;
    rs(x1, k1, l1, r1, s1);
    rs(x2, k2, l2, r2, s2);

    const double d1 = std::norm(r1) + std::norm(s1);
    const cd r12 = ((std::conj(l1) - l1) * std::conj(s1) * r1 * s2 +
                    (l2 - l1) * std::norm(r1) * r2 +
                    (l2 - std::conj(l1)) * std::norm(s1) * r2) / d1;
    const cd s12 = ((std::conj(l1) - l1) * s1 * std::conj(r1) * r2 +
                    (l2 - l1) * std::norm(s1) * s2 +
                    (l2 - std::conj(l1)) * std::norm(r1) * s2) / d1;
    const double d12 = std::norm(r12) + std::norm(s12);

    return std::exp(I * x) + 2.0 * (std::conj(l1) - l1) * s1 * std::conj(r1) / d1 +
           2.0 * (std::conj(l2) - l2) * s12 * std::conj(r12) / d12;
}

static std::vector<double> transverse_grid(int n) {
    // n points spanning [-pi, pi] inclusive (spacing 2*pi/(n-1))
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g[size_t(i)] = -M_PI + i * (2.0 * M_PI / (n - 1));
    return g;
}

Eigen::MatrixXcd breather_field(const NlseParams& p, long steps, BreatherVariant v,
                                double march0) {
    if (p.a <= 0) throw UsageError("breather parameter a must be > 0");
    if (p.x_points < 2) throw UsageError("x_points must be >= 2");
    const double dm = (p.dt > 0) ? p.dt : M_PI / 100.0;
    const std::vector<double> grid = transverse_grid(p.x_points);
    Eigen::MatrixXcd f(p.x_points, steps);
    for (long j = 0; j < steps; ++j) {
        const double m = march0 + j * dm;
        for (int i = 0; i < p.x_points; ++i) {
            // AB marches in t with channels on x; KM (role_swap) marches in x
            // with channels on t
            const double xv = p.role_swap ? m : grid[size_t(i)];
            const double tv = p.role_swap ? grid[size_t(i)] : m;
            if (breather_den_abs(p.a, v, xv, tv) < 1e-14)
                throw NumericalError("breather denominator vanished at (x=" +
                                     std::to_string(xv) + ", t=" + std::to_string(tv) + ")");
            f(i, j) = breather_value(p.a, v, xv, tv);
        }
    }
    return f;
}

Eigen::MatrixXcd collision_field(const NlseParams& p, long steps, double march0) {
    if (!(p.a1 > 0 && p.a1 < 0.5 && p.a2 > 0 && p.a2 < 0.5))
        throw UsageError("collision parameters must satisfy 0 < a1, a2 < 1/2");
    if (p.a1 == p.a2) throw UsageError("collision requires a1 != a2");
    const double dm = (p.dt > 0) ? p.dt : M_PI / 40.0;
    const std::vector<double> grid = transverse_grid(p.x_points);
    Eigen::MatrixXcd f(p.x_points, steps);
    for (long j = 0; j < steps; ++j) {
        const double tv = march0 + j * dm;
        for (int i = 0; i < p.x_points; ++i) {
            const cd val = collision_value(p.a1, p.a2, grid[size_t(i)], tv);
            if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
                throw NumericalError("collision solution pole at (x=" +
                                     std::to_string(grid[size_t(i)]) + ", t=" +
                                     std::to_string(tv) + ")");
            f(i, j) = val;
        }
    }
    return f;
}

double nlse_residual_max(const std::function<std::complex<double>(double, double)>& psi,
                         const std::vector<double>& xs, double t0, double period, int nt) {
    // spectral second derivative along t on a periodic window, FD4 in x
    const double hx = 1e-3;
    std::vector<cd> f(static_cast<size_t>(nt)), ftt(static_cast<size_t>(nt));
    double worst = 0.0;
    for (double x : xs) {
        for (int j = 0; j < nt; ++j) f[size_t(j)] = psi(x, t0 + j * (period / nt));
        // naive DFT differentiation: nt is small (<= 512), and this keeps the
        // oracle independent of the FFT library used by the solvers under test
        for (int j = 0; j < nt; ++j) ftt[size_t(j)] = cd(0, 0);
        for (int m = 0; m < nt; ++m) {
            const int mm = (m <= nt / 2) ? m : m - nt;  // signed mode index
            if (mm == nt / 2 && nt % 2 == 0) continue;  // drop unmatched Nyquist
            const double k = 2.0 * M_PI * mm / period;
            cd fk(0, 0);
            for (int j = 0; j < nt; ++j)
                fk += f[size_t(j)] * std::exp(-I * (2.0 * M_PI * double(m) * double(j) / double(nt)));
            fk /= double(nt);
            const cd coeff = -k * k * fk;
            for (int j = 0; j < nt; ++j)
                ftt[size_t(j)] += coeff * std::exp(I * (2.0 * M_PI * double(m) * double(j) / double(nt)));
        }
        for (int j = 0; j < nt; ++j) {
            const double t = t0 + j * (period / nt);
            const cd px = (-psi(x + 2 * hx, t) + 8.0 * psi(x + hx, t) -
                           8.0 * psi(x - hx, t) + psi(x - 2 * hx, t)) / (12.0 * hx);
            const cd val = f[size_t(j)];
            const cd res = I * px + 0.5 * ftt[size_t(j)] + std::norm(val) * val;
            worst = std::max(worst, std::abs(res));
        }
    }
    return worst;
}

double collision_common_period(double a1, double a2) {
    if (!(a1 > 0 && a1 < 0.5 && a2 > 0 && a2 < 0.5))
        throw UsageError("collision parameters must satisfy 0 < a1, a2 < 1/2");
    // every t-frequency in the solution is an integer combination of k1/2 and
    // k2/2, so the period is 2*pi / gcd(k1/2, k2/2); scan small multiples
    const double k1 = 2.0 * std::sqrt(1.0 - 2.0 * a1);
    const double k2 = 2.0 * std::sqrt(1.0 - 2.0 * a2);
    for (int m = 1; m <= 64; ++m) {
        const double P = m * 4.0 * M_PI / k1;
        const double cycles = P * k2 / (4.0 * M_PI);
        if (std::abs(cycles - std::round(cycles)) < 1e-9) return P;
    }
    throw UsageError("collision frequencies are not commensurate for a1=" +
                     std::to_string(a1) + ", a2=" + std::to_string(a2));
}

void breather_residual_window(double a, BreatherVariant v, double& t0,
                              double& period) {
    if (a < 0.5) {  // periodic in t
        const cd omega = (v == BreatherVariant::Standard)
                             ? 2.0 * std::sqrt(cd(1.0 - 2.0 * a))
                             : std::sqrt(cd(2.0 * (1.0 - 2.0 * a)));
        period = 2.0 * M_PI / omega.real();
        t0 = 0.0;
    } else {  // KM: localized in t; wide window where field ~ background
        period = 8.0 * M_PI;
        t0 = -4.0 * M_PI;
    }
}

BreatherVariant select_breather_variant(double a) {
    // evaluate both variants over one transverse period at a few x stations
    std::vector<double> xs = {-1.1, -0.3, 0.0, 0.4, 0.9};
    double best_res = 1e300;
    BreatherVariant best = BreatherVariant::Standard;
    for (BreatherVariant v : {BreatherVariant::Printed, BreatherVariant::Standard}) {
        double period, t0;
        breather_residual_window(a, v, t0, period);
        double r;
        try {
            r = nlse_residual_max([a, v](double x, double t) { return breather_value(a, v, x, t); },
                                  xs, t0, period, 512);
        } catch (...) {
            continue;  // a pole disqualifies the variant outright
        }
        if (r < best_res) {
            best_res = r;
            best = v;
        }
    }
    return best;
}

FieldSeries generate_breather(const NlseParams& p, long steps, Encoding enc,
                              BreatherVariant v) {
    const double dm = (p.dt > 0) ? p.dt : M_PI / 100.0;
    Eigen::MatrixXcd f = breather_field(p, steps, v, 0.0);
    std::string tag = (p.a < 0.5) ? "nlse-ab" : "nlse-km";
    tag += (v == BreatherVariant::Standard) ? " variant=standard" : " variant=printed";
    FieldSeries s = encode(f, enc, dm, transverse_grid(p.x_points), tag);
    return s;
}

FieldSeries generate_collision(const NlseParams& p, long steps, Encoding enc) {
    const double dm = (p.dt > 0) ? p.dt : M_PI / 40.0;
    // center the marching window on the crossing at t=0
    const double t0 = -0.5 * double(steps - 1) * dm;
    Eigen::MatrixXcd f = collision_field(p, steps, t0);
    FieldSeries s = encode(f, enc, dm, transverse_grid(p.x_points), "nlse-collision");
    return s;
}

} // namespace rcv
