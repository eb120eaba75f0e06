#include "rcv/kse.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "rcv/errors.hpp"
#include "rcv/etdrk4.hpp"
#include "rcv/rng.hpp"

namespace rcv {

// FFTW plan creation is not thread-safe; execution is. Shared with cgle.cpp.
std::mutex fftw_plan_mutex;

namespace {

using cd = std::complex<double>;

// Half-spectrum (r2c) integrator: conjugate symmetry is enforced by the
// representation itself. With a full complex spectrum, the antisymmetric
// roundoff component is invisible to the nonlinear term (it lives in the
// imaginary part of the real-space field) and grows at the bare linear rate
// of the most unstable mode until it wrecks the solution — around t=380 for
// L=22 no matter the step size.
class KseStepper {
public:
    KseStepper(int nx, double L, double h) : nx_(nx) {
        const int nk = nx / 2 + 1;
        Eigen::ArrayXd lin(nk);
        mask_.resize(nk);
        for (int m = 0; m < nk; ++m) {
            const double q = 2.0 * M_PI * m / L;
            lin(m) = q * q - q * q * q * q;
            // 2/3-rule dealiasing and Nyquist drop; g = -i k / 2 applied to fft(u^2)
            const bool keep = (q < (2.0 / 3.0) * M_PI * nx / L);
            mask_(m) = keep ? q : 0.0;
        }
        co_ = etdrk4_coeffs_real(lin, h);

        ur_ = fftw_alloc_real(size_t(nx));
        uk_ = fftw_alloc_complex(size_t(nk));
        {
            std::lock_guard<std::mutex> lock(fftw_plan_mutex);
            fwd_ = fftw_plan_dft_r2c_1d(nx, ur_, uk_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_1d(nx, uk_, ur_, FFTW_ESTIMATE);
        }
        v_.resize(nk);
        nv_.resize(nk); na_.resize(nk); nb_.resize(nk); nc_.resize(nk);
        a_.resize(nk); b_.resize(nk); cst_.resize(nk);
    }

    ~KseStepper() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(ur_);
        fftw_free(uk_);
    }

    KseStepper(const KseStepper&) = delete;
    KseStepper& operator=(const KseStepper&) = delete;

    void set_field(const Eigen::VectorXd& u) {
        for (int i = 0; i < nx_; ++i) ur_[i] = u(i);
        fftw_execute(fwd_);
        const int nk = nx_ / 2 + 1;
        for (int m = 0; m < nk; ++m) v_(m) = cd(uk_[m][0], uk_[m][1]) / double(nx_);
    }

    Eigen::VectorXd field() {
        to_real(v_);
        Eigen::VectorXd u(nx_);
        for (int i = 0; i < nx_; ++i) u(i) = ur_[i];
        return u;
    }

    void step() {
        nonlinear(v_, nv_);
        a_ = co_.E2 * v_ + co_.Q * nv_;
        nonlinear(a_, na_);
        b_ = co_.E2 * v_ + co_.Q * na_;
        nonlinear(b_, nb_);
        cst_ = co_.E2 * a_ + co_.Q * (2.0 * nb_ - nv_);
        nonlinear(cst_, nc_);
        v_ = co_.E * v_ + co_.f1 * nv_ + 2.0 * co_.f2 * (na_ + nb_) + co_.f3 * nc_;
    }

    bool finite() const { return v_.allFinite(); }

private:
    // N(v) = -1/2 i k fft(u^2), dealiased
    void nonlinear(const Eigen::ArrayXcd& v, Eigen::ArrayXcd& out) {
        to_real(v);
        for (int i = 0; i < nx_; ++i) ur_[i] *= ur_[i];
        fftw_execute(fwd_);
        const int nk = nx_ / 2 + 1;
        for (int m = 0; m < nk; ++m)
            out(m) = cd(0.0, -0.5 * mask_(m)) * cd(uk_[m][0], uk_[m][1]) / double(nx_);
    }

    void to_real(const Eigen::ArrayXcd& v) {
        const int nk = nx_ / 2 + 1;
        for (int m = 0; m < nk; ++m) {
            uk_[m][0] = v(m).real();
            uk_[m][1] = v(m).imag();
        }
        fftw_execute(bwd_);  // unnormalized: output scale nx * (v scale 1/nx) = 1
    }

    int nx_;
    Eigen::ArrayXd mask_;
    Etdrk4CoeffsReal co_;
    double* ur_;
    fftw_complex* uk_;
    fftw_plan fwd_, bwd_;
    Eigen::ArrayXcd v_, nv_, na_, nb_, nc_, a_, b_, cst_;
};

Eigen::VectorXd kse_initial_condition(const KseParams& p) {
    Rng rng(p.seed);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(p.x_points);
    for (int m = 1; m <= 8; ++m) {
        const double c = rng.uniform(-0.1, 0.1);
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        for (int i = 0; i < p.x_points; ++i) {
            const double x = i * (p.domain_length / p.x_points);
            u(i) += c * std::cos(2.0 * M_PI * m * x / p.domain_length + phi);
        }
    }
    return u;
}

} // namespace

static void check_kse_params(const KseParams& p) {
    if (p.x_points < 4 || (p.x_points & (p.x_points - 1)) != 0)
        throw UsageError("kse: x_points must be a power of two");
    if (p.dt <= 0 || p.integrate_dt <= 0) throw UsageError("kse: steps must be positive");
    const double sub = p.dt / p.integrate_dt;
    if (std::abs(sub - std::round(sub)) > 1e-9)
        throw UsageError("kse: dt must be an integer multiple of integrate_dt");
}

Eigen::MatrixXd solve_kse_from(const KseParams& p, const Eigen::VectorXd& u0,
                               long total_samples) {
    check_kse_params(p);
    if (u0.size() != p.x_points) throw UsageError("kse: initial state has wrong size");
    const long sub = long(std::round(p.dt / p.integrate_dt));
    KseStepper st(p.x_points, p.domain_length, p.integrate_dt);
    st.set_field(u0);
    Eigen::MatrixXd out(p.x_points, total_samples);
    if (total_samples == 0) return out;
    out.col(0) = st.field();
    for (long s = 1; s < total_samples; ++s) {
        for (long i = 0; i < sub; ++i) st.step();
        if (!st.finite())
            throw NumericalError("kse: field diverged at sample " + std::to_string(s) +
                                 " (integration step too large?)");
        out.col(s) = st.field();
    }
    return out;
}

Eigen::MatrixXd solve_kse(const KseParams& p, long total_samples) {
    check_kse_params(p);
    KseStepper st(p.x_points, p.domain_length, p.integrate_dt);
    st.set_field(kse_initial_condition(p));
    const long tsteps = long(std::round(p.transient_time / p.integrate_dt));
    for (long i = 0; i < tsteps; ++i) {
        st.step();
        if ((i & 1023) == 0 && !st.finite())
            throw NumericalError("kse: field diverged during transient");
    }
    if (!st.finite()) throw NumericalError("kse: field diverged during transient");

    const long sub = long(std::round(p.dt / p.integrate_dt));
    Eigen::MatrixXd out(p.x_points, total_samples);
    if (total_samples == 0) return out;
    out.col(0) = st.field();
    for (long s = 1; s < total_samples; ++s) {
        for (long i = 0; i < sub; ++i) st.step();
        if (!st.finite())
            throw NumericalError("kse: field diverged at sample " + std::to_string(s));
        out.col(s) = st.field();
    }
    return out;
}

FieldSeries generate_kse(const KseParams& p, long total_samples) {
    Eigen::MatrixXd u = solve_kse(p, total_samples);
    std::vector<double> grid(static_cast<size_t>(p.x_points));
    for (int i = 0; i < p.x_points; ++i) grid[size_t(i)] = i * (p.domain_length / p.x_points);
    return encode(u, Encoding::RealScalar, p.dt, std::move(grid), "kse");
}

} // namespace rcv
