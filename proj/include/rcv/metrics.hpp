#pragma once
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rcv/esn.hpp"
#include "rcv/field_series.hpp"

namespace rcv {

struct ErrorTrace {
    Eigen::VectorXd rmse;
    double dt = 0.0;
    double lyapunov_max = 0.0;  // 0 = unknown; used only for axis conversion
    long diverged_at = -1;      // first non-finite prediction step, -1 if none
};

// rmse[t] = sqrt( (1/M) sum_i (truth(i,t) - pred(i,t))^2 )
Eigen::VectorXd rmse_per_step(const Eigen::MatrixXd& truth,
                              const Eigen::MatrixXd& pred);
ErrorTrace rmse_per_step(const FieldSeries& truth, const FieldSeries& pred);

// Cap used for diverged traces: 10x the RMS amplitude of the truth series.
double divergence_sentinel(const Eigen::MatrixXd& truth);

// Extend to `horizon` entries. Missing (post-divergence) steps are filled
// with the sentinel and existing entries are capped at it, so ensemble
// averages stay finite and comparable.
void cap_trace(ErrorTrace& t, long horizon, double sentinel);

// Pointwise mean and population standard deviation; traces must have equal
// length (cap_trace first).
std::pair<Eigen::VectorXd, Eigen::VectorXd>
ensemble_stats(const std::vector<ErrorTrace>& traces);

// Time average over the training window of ||W_RO r'(t) - v(t)||, normalized
// per step like rmse_per_step. states holds already-normalized r'(t) columns.
double training_error(const EsnModel& model, const Eigen::MatrixXd& states,
                      const Eigen::MatrixXd& targets);

struct ErrorSurface {
    Eigen::VectorXd rho_grid;   // ascending
    Eigen::MatrixXd mean;       // |rho| x T
    Eigen::MatrixXd stddev;     // |rho| x T
    double dt = 0.0;
    double lyapunov_max = 0.0;
    int ensemble_size = 0;
};

struct ValleyReport {
    double rho_lo = 0.0;
    double rho_hi = 0.0;
    double best_rho = 0.0;
    double best_score = 0.0;
    double threshold = 0.0;
    long horizon_steps = 0;
    bool empty = true;          // no rho met the threshold
    Eigen::VectorXd score;      // per-rho mean over the first horizon_steps
};

// score(rho) = mean of the first horizon_steps of the mean-RMSE row; the
// valley is the maximal contiguous run with score <= threshold that contains
// the global argmin.
ValleyReport detect_valley(const ErrorSurface& s, double threshold,
                           long horizon_steps);

// columns: rho,step,time,lyapunov_time,mean_rmse,std_rmse
void write_surface_csv(const ErrorSurface& s, const std::string& path);
ErrorSurface read_surface_csv(const std::string& path);

void write_valley_txt(const ValleyReport& v, const std::string& path);

// ASCII PGM, one row per rho: gray = round(255 * min(v, cutoff) / cutoff)
void write_pgm(const Eigen::MatrixXd& values, const std::string& path,
               double cutoff = 3.0);

} // namespace rcv
