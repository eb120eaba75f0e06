#include "rcv/cgle.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "rcv/errors.hpp"
#include "rcv/etdrk4.hpp"
#include "rcv/rng.hpp"

namespace rcv {

extern std::mutex fftw_plan_mutex;  // defined in kse.cpp

namespace {

using cd = std::complex<double>;

class CgleStepper {
public:
    CgleStepper(int nx, double L, double h, double alpha, double beta)
        : nx_(nx), beta_(beta) {
        Eigen::ArrayXcd lin(nx);
        mask_.resize(nx);
        for (int m = 0; m < nx; ++m) {
            const int mm = (m <= nx / 2) ? m : m - nx;
            const double q = 2.0 * M_PI * mm / L;
            lin(m) = 1.0 - cd(1.0, alpha) * q * q;
            mask_(m) = (std::abs(q) < (2.0 / 3.0) * M_PI * nx / L) ? 1.0 : 0.0;
        }
        co_ = etdrk4_coeffs_complex(lin, h);

        buf_ = fftw_alloc_complex(size_t(nx));
        {
            std::lock_guard<std::mutex> lock(fftw_plan_mutex);
            fwd_ = fftw_plan_dft_1d(nx, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_1d(nx, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        v_.resize(nx);
        nv_.resize(nx); na_.resize(nx); nb_.resize(nx); nc_.resize(nx);
        a_.resize(nx); b_.resize(nx); cst_.resize(nx);
    }

    ~CgleStepper() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    CgleStepper(const CgleStepper&) = delete;
    CgleStepper& operator=(const CgleStepper&) = delete;

    void set_field(const Eigen::VectorXcd& u) {
        for (int i = 0; i < nx_; ++i) {
            buf_[i][0] = u(i).real();
            buf_[i][1] = u(i).imag();
        }
        fftw_execute(fwd_);
        for (int m = 0; m < nx_; ++m) v_(m) = cd(buf_[m][0], buf_[m][1]) / double(nx_);
    }

    Eigen::VectorXcd field() {
        to_real(v_);
        Eigen::VectorXcd u(nx_);
        for (int i = 0; i < nx_; ++i) u(i) = cd(buf_[i][0], buf_[i][1]);
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
    // N(u) = -(1 + i beta) |u|^2 u, dealiased
    void nonlinear(const Eigen::ArrayXcd& v, Eigen::ArrayXcd& out) {
        to_real(v);
        const cd fac(1.0, beta_);
        for (int i = 0; i < nx_; ++i) {
            const cd u(buf_[i][0], buf_[i][1]);
            const cd w = -fac * std::norm(u) * u;
            buf_[i][0] = w.real();
            buf_[i][1] = w.imag();
        }
        fftw_execute(fwd_);
        for (int m = 0; m < nx_; ++m)
            out(m) = mask_(m) * cd(buf_[m][0], buf_[m][1]) / double(nx_);
    }

    void to_real(const Eigen::ArrayXcd& v) {
        for (int m = 0; m < nx_; ++m) {
            buf_[m][0] = v(m).real();
            buf_[m][1] = v(m).imag();
        }
        fftw_execute(bwd_);  // unnormalized; storage already carries the 1/nx
    }

    int nx_;
    double beta_;
    Eigen::ArrayXd mask_;
    Etdrk4Coeffs co_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
    Eigen::ArrayXcd v_, nv_, na_, nb_, nc_, a_, b_, cst_;
};

Eigen::VectorXcd cgle_initial_condition(const CglParams& p) {
    Rng rng(p.seed);
    Eigen::VectorXcd u(p.x_points);
    for (int i = 0; i < p.x_points; ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        u(i) = 0.01 * cd(re, im);
    }
    return u;
}

} // namespace

static void check_cgle_params(const CglParams& p) {
    if (p.x_points < 4) throw UsageError("cgle: x_points too small");
    if (p.sample_dt <= 0 || p.integrate_dt <= 0)
        throw UsageError("cgle: steps must be positive");
    const double sub = p.sample_dt / p.integrate_dt;
    if (std::abs(sub - std::round(sub)) > 1e-6)
        throw UsageError("cgle: sample_dt must be an integer multiple of integrate_dt");
}

Eigen::MatrixXcd solve_cgle_from(const CglParams& p, const Eigen::VectorXcd& u0,
                                 long total_samples) {
    check_cgle_params(p);
    if (u0.size() != p.x_points) throw UsageError("cgle: initial state has wrong size");
    CgleStepper st(p.x_points, p.domain_length, p.integrate_dt, p.alpha_disp, p.beta_disp);
    st.set_field(u0);
    const long sub = long(std::round(p.sample_dt / p.integrate_dt));
    Eigen::MatrixXcd out(p.x_points, total_samples);
    if (total_samples == 0) return out;
    out.col(0) = st.field();
    for (long s = 1; s < total_samples; ++s) {
        for (long i = 0; i < sub; ++i) st.step();
        if (!st.finite())
            throw NumericalError("cgle: field diverged at sample " + std::to_string(s));
        out.col(s) = st.field();
    }
    return out;
}

Eigen::MatrixXcd solve_cgle(const CglParams& p, long total_samples) {
    check_cgle_params(p);
    CgleStepper st(p.x_points, p.domain_length, p.integrate_dt, p.alpha_disp, p.beta_disp);
    st.set_field(cgle_initial_condition(p));
    const long tsteps = long(std::round(p.transient_time / p.integrate_dt));
    for (long i = 0; i < tsteps; ++i) {
        st.step();
        if ((i & 8191) == 0 && !st.finite())
            throw NumericalError("cgle: field diverged during transient");
    }
    if (!st.finite()) throw NumericalError("cgle: field diverged during transient");
    const long sub = long(std::round(p.sample_dt / p.integrate_dt));
    Eigen::MatrixXcd out(p.x_points, total_samples);
    if (total_samples == 0) return out;
    out.col(0) = st.field();
    for (long s = 1; s < total_samples; ++s) {
        for (long i = 0; i < sub; ++i) st.step();
        if (!st.finite())
            throw NumericalError("cgle: field diverged at sample " + std::to_string(s));
        out.col(s) = st.field();
    }
    return out;
}

FieldSeries generate_cgle(const CglParams& p, long total_samples, Encoding enc) {
    Eigen::MatrixXcd u = solve_cgle(p, total_samples);
    std::vector<double> grid(static_cast<size_t>(p.x_points));
    for (int i = 0; i < p.x_points; ++i)
        grid[size_t(i)] = -p.domain_length / 2.0 + i * (p.domain_length / p.x_points);
    return encode(u, enc, p.sample_dt, std::move(grid), "cgle");
}

} // namespace rcv
