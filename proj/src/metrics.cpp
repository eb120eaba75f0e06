#include "rcv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rcv/errors.hpp"

namespace rcv {

static void fmt17(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

Eigen::VectorXd rmse_per_step(const Eigen::MatrixXd& truth,
                              const Eigen::MatrixXd& pred) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
        throw UsageError("rmse_per_step: shape mismatch");
    const double m = double(truth.rows());
    return ((truth - pred).colwise().squaredNorm() / m).cwiseSqrt().transpose();
}

ErrorTrace rmse_per_step(const FieldSeries& truth, const FieldSeries& pred) {
    if (truth.encoding != pred.encoding)
        throw UsageError("rmse_per_step: encoding mismatch");
    if (truth.dt != pred.dt) throw UsageError("rmse_per_step: dt mismatch");
    ErrorTrace t;
    t.rmse = rmse_per_step(truth.data, pred.data);
    t.dt = truth.dt;
    return t;
}

double divergence_sentinel(const Eigen::MatrixXd& truth) {
    if (truth.size() == 0) throw UsageError("divergence_sentinel: empty series");
    return 10.0 * std::sqrt(truth.squaredNorm() / double(truth.size()));
}

void cap_trace(ErrorTrace& t, long horizon, double sentinel) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(horizon, sentinel);
    const long n = std::min<long>(t.rmse.size(), horizon);
    for (long i = 0; i < n; ++i) out(i) = std::min(t.rmse(i), sentinel);
    t.rmse = std::move(out);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd>
ensemble_stats(const std::vector<ErrorTrace>& traces) {
    if (traces.empty()) throw UsageError("ensemble_stats: no traces");
    const long T = traces.front().rmse.size();
    for (const auto& t : traces)
        if (t.rmse.size() != T)
            throw UsageError("ensemble_stats: traces have unequal length");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(T);
    for (const auto& t : traces) mean += t.rmse;
    mean /= double(traces.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(T);
    for (const auto& t : traces) var += (t.rmse - mean).cwiseAbs2();
    var /= double(traces.size());  // population std: fixed deterministic ensembles
    return {std::move(mean), var.cwiseSqrt()};
}

double training_error(const EsnModel& model, const Eigen::MatrixXd& states,
                      const Eigen::MatrixXd& targets) {
    if (!model.trained) throw UsageError("training_error: model is not trained");
    if (states.cols() != targets.cols() || states.cols() == 0)
        throw UsageError("training_error: state/target mismatch");
    Eigen::MatrixXd resid = model.readout * states - targets;
    return ((resid.colwise().squaredNorm() / double(resid.rows())).cwiseSqrt())
        .mean();
}

ValleyReport detect_valley(const ErrorSurface& s, double threshold,
                           long horizon_steps) {
    const long R = s.rho_grid.size();
    if (R == 0 || s.mean.rows() != R)
        throw UsageError("detect_valley: empty or misaligned surface");
    if (horizon_steps < 1 || horizon_steps > s.mean.cols())
        throw UsageError("detect_valley: horizon_steps out of range");
    ValleyReport v;
    v.threshold = threshold;
    v.horizon_steps = horizon_steps;
    v.score = s.mean.leftCols(horizon_steps).rowwise().mean();
    long best = 0;
    for (long i = 1; i < R; ++i)
        if (v.score(i) < v.score(best)) best = i;
    v.best_rho = s.rho_grid(best);
    v.best_score = v.score(best);
    if (v.best_score <= threshold) {
        long lo = best, hi = best;
        while (lo > 0 && v.score(lo - 1) <= threshold) --lo;
        while (hi + 1 < R && v.score(hi + 1) <= threshold) ++hi;
        v.rho_lo = s.rho_grid(lo);
        v.rho_hi = s.rho_grid(hi);
        v.empty = false;
    }
    return v;
}

void write_surface_csv(const ErrorSurface& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open for writing: " + path);
    f << "rho,step,time,lyapunov_time,mean_rmse,std_rmse\n";
    std::string line;
    for (long r = 0; r < s.rho_grid.size(); ++r) {
        for (long t = 0; t < s.mean.cols(); ++t) {
            line.clear();
            fmt17(line, s.rho_grid(r));
            line += ",";
            line += std::to_string(t);
            line += ",";
            fmt17(line, double(t) * s.dt);
            line += ",";
            fmt17(line, s.lyapunov_max > 0
                            ? double(t) * s.dt * s.lyapunov_max
                            : 0.0);
            line += ",";
            fmt17(line, s.mean(r, t));
            line += ",";
            fmt17(line, s.stddev(r, t));
            f << line << "\n";
        }
    }
    if (!f) throw UsageError("write failed: " + path);
}

ErrorSurface read_surface_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line) ||
        line != "rho,step,time,lyapunov_time,mean_rmse,std_rmse")
        throw UsageError("surface csv: bad header in " + path);
    std::vector<double> rhos;
    std::vector<std::vector<double>> means, stds;
    double dt = 0.0, lt_unit = 0.0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double rho, time, lt, mu, sd;
        long step;
        char c;
        if (!(ss >> rho >> c >> step >> c >> time >> c >> lt >> c >> mu >> c >> sd))
            throw UsageError("surface csv: bad row in " + path);
        if (rhos.empty() || rho != rhos.back()) {
            rhos.push_back(rho);
            means.emplace_back();
            stds.emplace_back();
        }
        means.back().push_back(mu);
        stds.back().push_back(sd);
        if (step == 1) {
            dt = time;
            lt_unit = lt;
        }
    }
    if (rhos.empty()) throw UsageError("surface csv: no data in " + path);
    const long T = long(means.front().size());
    ErrorSurface s;
    s.rho_grid.resize(long(rhos.size()));
    s.mean.resize(long(rhos.size()), T);
    s.stddev.resize(long(rhos.size()), T);
    for (size_t r = 0; r < rhos.size(); ++r) {
        if (long(means[r].size()) != T)
            throw UsageError("surface csv: ragged rho blocks in " + path);
        s.rho_grid(long(r)) = rhos[r];
        for (long t = 0; t < T; ++t) {
            s.mean(long(r), t) = means[r][size_t(t)];
            s.stddev(long(r), t) = stds[r][size_t(t)];
        }
    }
    s.dt = dt;
    s.lyapunov_max = dt > 0 ? lt_unit / dt : 0.0;
    return s;
}

void write_valley_txt(const ValleyReport& v, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open for writing: " + path);
    auto put = [&](const char* key, double val) {
        std::string line(key);
        line += " = ";
        fmt17(line, val);
        f << line << "\n";
    };
    f << "empty = " << (v.empty ? 1 : 0) << "\n";
    put("rho_lo", v.rho_lo);
    put("rho_hi", v.rho_hi);
    put("best_rho", v.best_rho);
    put("best_score", v.best_score);
    put("threshold", v.threshold);
    f << "horizon_steps = " << v.horizon_steps << "\n";
    std::string line = "scores =";
    for (long i = 0; i < v.score.size(); ++i) {
        line += i ? "," : " ";
        fmt17(line, v.score(i));
    }
    f << line << "\n";
    if (!f) throw UsageError("write failed: " + path);
}

void write_pgm(const Eigen::MatrixXd& values, const std::string& path,
               double cutoff) {
    if (cutoff <= 0) throw UsageError("write_pgm: cutoff must be positive");
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open for writing: " + path);
    f << "P2\n" << values.cols() << " " << values.rows() << "\n255\n";
    for (long r = 0; r < values.rows(); ++r) {
        for (long c = 0; c < values.cols(); ++c) {
            const double v = std::min(values(r, c), cutoff);
            const int g = int(std::lround(255.0 * v / cutoff));
            f << g << (c + 1 < values.cols() ? ' ' : '\n');
        }
    }
    if (!f) throw UsageError("write failed: " + path);
}

} // namespace rcv
