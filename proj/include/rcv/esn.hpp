#pragma once
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "rcv/field_series.hpp"
#include "rcv/topology.hpp"

namespace rcv {

struct EsnHyperParams {
    int n = 0;               // reservoir size N
    int input_dim = 0;       // M
    int output_dim = 0;      // L (== M throughout)
    double input_scale = 1.0;  // alpha: W_IR entries uniform on [-alpha, alpha]
    int transient_steps = 0;   // S
    double ridge = 0.0;        // Gamma
    double dt = 0.0;           // sampling step of the target system
};

// One nonzero per row; row r (in block j = r / (n/M)) reads input channel j.
struct InputMap {
    Eigen::VectorXd w;  // nonzero value per row
    uint64_t seed = 0;
};

InputMap make_input_map(int n, int input_dim, double alpha, uint64_t seed);

struct EsnModel {
    EsnHyperParams hyper;
    InputMap input_map;
    ReservoirNetwork reservoir;
    Eigen::MatrixXd readout;  // L x n, present after training
    bool trained = false;

    int block_rows() const { return hyper.n / hyper.input_dim; }
    int input_channel_of_row(int r) const { return r / block_rows(); }
};

struct ReservoirState {
    Eigen::VectorXd r;
    long step_index = 0;
};

ReservoirState zero_state(const EsnModel& model);

// r_next = tanh(W_res r + W_IR u)
ReservoirState step(const EsnModel& model, const ReservoirState& state,
                    const Eigen::VectorXd& u);

// squares components at even 1-based positions (0-based odd indices)
Eigen::VectorXd normalize_state(const Eigen::VectorXd& r);

// Open-loop drive over all series columns; returns n x T matrix of
// normalized states (column t = state after consuming sample t).
// Explicit-matrix path; fine for tests and small runs, O(n*T) memory.
Eigen::MatrixXd listen(const EsnModel& model, const FieldSeries& series,
                       const ReservoirState& initial);

// W_RO = V R'^T (R' R'^T + Gamma I)^{-1} via an SPD solve after dropping the
// first `discard` columns. Throws NumericalError if the Gram system is
// numerically singular (possible only at Gamma=0).
Eigen::MatrixXd train_readout(const Eigen::MatrixXd& states,
                              const Eigen::MatrixXd& targets,
                              double ridge, int discard);

// Reference minimizer of the same ridge loss by conjugate gradients, applying
// the operator as (X R') R'^T + Gamma X without ever forming the Gram matrix.
// Slow; exists as an independent cross-check of train_readout.
Eigen::MatrixXd minimize_readout_loss(const Eigen::MatrixXd& states,
                                      const Eigen::MatrixXd& targets,
                                      double ridge, int discard,
                                      int max_iters = 2000, double rtol = 1e-13);

struct TrainResult {
    ReservoirState final_state;  // state after the last training sample (warm start)
    double training_error = 0.0; // time-averaged per-step channel-normalized residual
    long pairs_used = 0;
};

// Streaming trainer: listens over the series, accumulates the Gram system in
// fixed-size chunks (no n x T matrix), solves for model.readout, then makes a
// second streaming pass for the training error. Pair t is (state after u(t),
// u(t+1)); the first hyper.transient_steps pairs are discarded.
TrainResult train(EsnModel& model, const FieldSeries& series);

struct PredictResult {
    FieldSeries series;                // valid (finite) prefix of the prediction
    std::optional<long> diverged_at;   // step where a non-finite value appeared
};

// Closed loop for `horizon` steps: output o = W_RO r'(t) is recorded as the
// next sample's prediction and fed back as input. Cold start: pass a warmup
// series (driven open-loop first) and a zero start state.
PredictResult predict(const EsnModel& model, const FieldSeries* warmup,
                      ReservoirState state, long horizon);

// ASCII container, %.17g throughout; round-trips bit-exactly.
void save_model(const EsnModel& model, const std::string& path);
EsnModel load_model(const std::string& path);

} // namespace rcv
