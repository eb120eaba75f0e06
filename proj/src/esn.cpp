#include "rcv/esn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rcv/errors.hpp"
#include "rcv/rng.hpp"

namespace rcv {

InputMap make_input_map(int n, int input_dim, double alpha, uint64_t seed) {
    if (input_dim <= 0 || n <= 0) throw UsageError("input map: n and M must be positive");
    if (n % input_dim != 0)
        throw UsageError("reservoir size must be divisible by input dimension");
    InputMap im;
    im.seed = seed;
    im.w.resize(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) im.w(i) = rng.uniform(-alpha, alpha);
    return im;
}

ReservoirState zero_state(const EsnModel& model) {
    return ReservoirState{Eigen::VectorXd::Zero(model.hyper.n), 0};
}

static void check_dims(const EsnModel& m, const Eigen::VectorXd& u) {
    if (int(u.size()) != m.hyper.input_dim)
        throw UsageError("input vector dimension mismatch");
}

// W_IR u without materializing the sparse matrix: row r reads channel r/block.
static inline void add_input(const EsnModel& m, const Eigen::VectorXd& u,
                             Eigen::VectorXd& acc) {
    const int block = m.block_rows();
    const int M = m.hyper.input_dim;
    for (int j = 0; j < M; ++j)
        acc.segment(j * block, block) += m.input_map.w.segment(j * block, block) * u(j);
}

ReservoirState step(const EsnModel& model, const ReservoirState& state,
                    const Eigen::VectorXd& u) {
    check_dims(model, u);
    if (state.r.size() != model.hyper.n) throw UsageError("state dimension mismatch");
    ReservoirState next;
    next.r.noalias() = model.reservoir.weights * state.r;
    add_input(model, u, next.r);
    next.r = next.r.array().tanh();
    next.step_index = state.step_index + 1;
    return next;
}

Eigen::VectorXd normalize_state(const Eigen::VectorXd& r) {
    Eigen::VectorXd out = r;
    for (long i = 1; i < out.size(); i += 2) out(i) *= out(i);
    return out;
}

Eigen::MatrixXd listen(const EsnModel& model, const FieldSeries& series,
                       const ReservoirState& initial) {
    if (series.channels() != model.hyper.input_dim)
        throw UsageError("series channel count != model input dimension");
    if (series.steps() == 0) throw UsageError("cannot listen to an empty series");
    const long T = series.steps();
    Eigen::MatrixXd states(model.hyper.n, T);
    ReservoirState st = initial;
    for (long t = 0; t < T; ++t) {
        st = step(model, st, series.data.col(t));
        states.col(t) = normalize_state(st.r);
    }
    return states;
}

Eigen::MatrixXd train_readout(const Eigen::MatrixXd& states,
                              const Eigen::MatrixXd& targets,
                              double ridge, int discard) {
    if (states.cols() != targets.cols()) throw UsageError("states/targets column mismatch");
    if (ridge < 0) throw UsageError("ridge must be >= 0");
    const long T = states.cols();
    if (T <= discard) throw UsageError("no training columns left after transient discard");
    const long n = states.rows();
    const auto R = states.rightCols(T - discard);
    const auto V = targets.rightCols(T - discard);

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    G.selfadjointView<Eigen::Lower>().rankUpdate(R, 1.0);
    G = G.selfadjointView<Eigen::Lower>();
    G.diagonal().array() += ridge;

    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw NumericalError("readout training: Gram system is numerically singular "
                             "(rank-deficient states with ridge=0?)");
    Eigen::MatrixXd C = R * V.transpose();   // n x L
    return llt.solve(C).transpose();         // L x n
}

Eigen::MatrixXd minimize_readout_loss(const Eigen::MatrixXd& states,
                                      const Eigen::MatrixXd& targets,
                                      double ridge, int discard,
                                      int max_iters, double rtol) {
    if (states.cols() != targets.cols()) throw UsageError("states/targets column mismatch");
    const long T = states.cols();
    if (T <= discard) throw UsageError("no training columns left after transient discard");
    const Eigen::MatrixXd R = states.rightCols(T - discard);
    const Eigen::MatrixXd V = targets.rightCols(T - discard);
    const long L = V.rows(), n = R.rows();

    // grad = 0  <=>  X (R R^T + ridge I) = V R^T; CG per row, all rows at once
    auto apply = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        return (X * R) * R.transpose() + ridge * X;
    };
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(L, n);
    Eigen::MatrixXd res = V * R.transpose();  // B - apply(0)
    Eigen::MatrixXd P = res;
    Eigen::VectorXd rs = res.rowwise().squaredNorm();
    const Eigen::VectorXd rs0 = rs;
    for (int it = 0; it < max_iters; ++it) {
        const Eigen::MatrixXd AP = apply(P);
        Eigen::VectorXd pap = (P.array() * AP.array()).rowwise().sum();
        Eigen::VectorXd alpha(L);
        for (long i = 0; i < L; ++i) alpha(i) = pap(i) > 0 ? rs(i) / pap(i) : 0.0;
        X += alpha.asDiagonal() * P;
        res -= alpha.asDiagonal() * AP;
        const Eigen::VectorXd rs_new = res.rowwise().squaredNorm();
        bool done = true;
        for (long i = 0; i < L; ++i)
            if (rs_new(i) > rtol * rtol * rs0(i)) { done = false; break; }
        if (done) return X;
        Eigen::VectorXd beta(L);
        for (long i = 0; i < L; ++i) beta(i) = rs(i) > 0 ? rs_new(i) / rs(i) : 0.0;
        P = res + beta.asDiagonal() * P;
        rs = rs_new;
    }
    return X;
}

TrainResult train(EsnModel& model, const FieldSeries& series) {
    if (series.channels() != model.hyper.input_dim)
        throw UsageError("series channel count != model input dimension");
    const long T = series.steps();
    const int S = model.hyper.transient_steps;
    if (T - 1 <= S) throw UsageError("series too short to train past the transient");
    const int n = model.hyper.n;
    const int L = model.hyper.output_dim;
    const long chunk = 1024;

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, L);
    Eigen::MatrixXd Rc(n, chunk);
    Eigen::MatrixXd Vc(L, chunk);
    long fill = 0;

    auto flush = [&]() {
        if (!fill) return;
        G.selfadjointView<Eigen::Lower>().rankUpdate(Rc.leftCols(fill), 1.0);
        C.noalias() += Rc.leftCols(fill) * Vc.leftCols(fill).transpose();
        fill = 0;
    };

    ReservoirState st = zero_state(model);
    long pairs = 0;
    for (long t = 0; t < T; ++t) {
        st = step(model, st, series.data.col(t));
        if (t <= T - 2 && t >= S) {
            Rc.col(fill) = normalize_state(st.r);
            Vc.col(fill) = series.data.col(t + 1);
            ++fill;
            ++pairs;
            if (fill == chunk) flush();
        }
    }
    flush();

    G = G.selfadjointView<Eigen::Lower>();
    G.diagonal().array() += model.hyper.ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw NumericalError("readout training: Gram system is numerically singular");
    model.readout = llt.solve(C).transpose();
    model.trained = true;

    // second pass for the training error (listen again, residual per step)
    TrainResult res;
    res.pairs_used = pairs;
    ReservoirState st2 = zero_state(model);
    double esum = 0.0;
    Eigen::VectorXd rp(n), out(L);
    for (long t = 0; t < T; ++t) {
        st2 = step(model, st2, series.data.col(t));
        if (t <= T - 2 && t >= S) {
            rp = normalize_state(st2.r);
            out.noalias() = model.readout * rp;
            esum += std::sqrt((out - series.data.col(t + 1)).squaredNorm() / double(L));
        }
    }
    res.training_error = esum / double(pairs);
    res.final_state = st2;
    return res;
}

PredictResult predict(const EsnModel& model, const FieldSeries* warmup,
                      ReservoirState state, long horizon) {
    if (!model.trained) throw UsageError("predict called on an untrained model");
    if (horizon < 0) throw UsageError("horizon must be >= 0");
    if (warmup) {
        if (warmup->channels() != model.hyper.input_dim)
            throw UsageError("warmup channel count mismatch");
        for (long t = 0; t < warmup->steps(); ++t)
            state = step(model, state, warmup->data.col(t));
    }
    PredictResult res;
    res.series.dt = model.hyper.dt;
    res.series.encoding = Encoding::RealScalar;
    res.series.system_tag = "prediction";
    Eigen::MatrixXd out(model.hyper.output_dim, horizon);
    long valid = 0;
    for (long t = 0; t < horizon; ++t) {
        Eigen::VectorXd o = model.readout * normalize_state(state.r);
        if (!o.allFinite()) {
            res.diverged_at = t;
            break;
        }
        out.col(t) = o;
        ++valid;
        state = step(model, state, o);
    }
    res.series.data = out.leftCols(valid).eval();
    return res;
}

// ---- serialization ----------------------------------------------------

static void put17(std::ostream& f, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    f << buf;
}

void save_model(const EsnModel& model, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open for writing: " + path);
    f << "rcvmodel 1\n";
    f << "hyper " << model.hyper.n << " " << model.hyper.input_dim << " "
      << model.hyper.output_dim << " ";
    put17(f, model.hyper.input_scale);
    f << " " << model.hyper.transient_steps << " ";
    put17(f, model.hyper.ridge);
    f << " ";
    put17(f, model.hyper.dt);
    f << "\n";
    f << "input_map " << model.input_map.seed << " " << model.input_map.w.size() << "\n";
    for (long i = 0; i < model.input_map.w.size(); ++i) {
        put17(f, model.input_map.w(i));
        f << "\n";
    }
    const auto& net = model.reservoir;
    f << "reservoir " << int(net.spec.kind) << " " << net.spec.n << " ";
    put17(f, net.spec.avg_degree);
    f << " ";
    put17(f, net.spec.rewire_prob);
    f << " " << net.spec.seed << " ";
    put17(f, net.spectral_radius);
    f << " " << net.weights.nonZeros() << "\n";
    for (int k = 0; k < net.weights.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(net.weights, k); it; ++it) {
            f << it.row() << " " << it.col() << " ";
            put17(f, it.value());
            f << "\n";
        }
    f << "readout " << (model.trained ? model.readout.rows() : 0) << " "
      << (model.trained ? model.readout.cols() : 0) << "\n";
    if (model.trained)
        for (long i = 0; i < model.readout.rows(); ++i) {
            for (long j = 0; j < model.readout.cols(); ++j) {
                if (j) f << " ";
                put17(f, model.readout(i, j));
            }
            f << "\n";
        }
    if (!f) throw UsageError("write failed: " + path);
}

EsnModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open: " + path);
    std::string magic;
    int version = 0;
    f >> magic >> version;
    if (magic != "rcvmodel" || version != 1)
        throw UsageError("not a model file (or unsupported version): " + path);
    EsnModel m;
    std::string tag;
    f >> tag;
    if (tag != "hyper") throw UsageError("model file: expected hyper");
    f >> m.hyper.n >> m.hyper.input_dim >> m.hyper.output_dim >> m.hyper.input_scale
      >> m.hyper.transient_steps >> m.hyper.ridge >> m.hyper.dt;
    f >> tag;
    if (tag != "input_map") throw UsageError("model file: expected input_map");
    long nw = 0;
    f >> m.input_map.seed >> nw;
    m.input_map.w.resize(nw);
    for (long i = 0; i < nw; ++i) f >> m.input_map.w(i);
    f >> tag;
    if (tag != "reservoir") throw UsageError("model file: expected reservoir");
    int kind = 0;
    long nnz = 0;
    f >> kind >> m.reservoir.spec.n >> m.reservoir.spec.avg_degree
      >> m.reservoir.spec.rewire_prob >> m.reservoir.spec.seed
      >> m.reservoir.spectral_radius >> nnz;
    m.reservoir.spec.kind = TopologyKind(kind);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_t(nnz));
    for (long e = 0; e < nnz; ++e) {
        int i, j;
        double w;
        f >> i >> j >> w;
        trips.emplace_back(i, j, w);
    }
    m.reservoir.weights.resize(m.reservoir.spec.n, m.reservoir.spec.n);
    m.reservoir.weights.setFromTriplets(trips.begin(), trips.end());
    m.reservoir.weights.makeCompressed();
    f >> tag;
    if (tag != "readout") throw UsageError("model file: expected readout");
    long rr = 0, rc = 0;
    f >> rr >> rc;
    if (rr > 0) {
        m.readout.resize(rr, rc);
        for (long i = 0; i < rr; ++i)
            for (long j = 0; j < rc; ++j) f >> m.readout(i, j);
        m.trained = true;
    }
    if (!f) throw UsageError("model file truncated: " + path);
    return m;
}

} // namespace rcv
