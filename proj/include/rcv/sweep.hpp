#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "rcv/cgle.hpp"
#include "rcv/esn.hpp"
#include "rcv/field_series.hpp"
#include "rcv/kse.hpp"
#include "rcv/metrics.hpp"
#include "rcv/nlse.hpp"
#include "rcv/topology.hpp"

namespace rcv {

enum class SystemKind { NlseAB, NlseKM, NlseCollision, KSE, CGLE };

std::string system_kind_name(SystemKind k);
SystemKind system_kind_from_name(const std::string& s);

// One target system plus its encoding. Only the params matching `kind` are
// consulted.
struct SystemConfig {
    SystemKind kind = SystemKind::KSE;
    NlseParams nlse;
    KseParams kse;
    CglParams cgle;
    Encoding encoding = Encoding::RealScalar;

    double sample_dt() const;
    double lyapunov_max() const;  // 0 for the analytic NLSE states
};

enum class StartMode { Warm, Cold };

struct SweepSpec {
    SystemConfig system;
    EsnHyperParams esn;        // input/output dims filled from the truth series
    TopologySpec topology;     // seed overridden per realization
    std::vector<double> rho_grid;
    int ensemble_size = 1;
    long train_steps = 0;      // N_t: samples consumed for training
    long horizon = 0;          // closed-loop prediction steps
    StartMode start_mode = StartMode::Warm;
    long warmup_steps = 100;   // Cold only
    uint64_t master_seed = 0;
    double valley_threshold = 0.5;
    long valley_horizon = 0;   // 0 = score over the full horizon
};

void validate_spec(const SweepSpec& spec);

struct SeedTuple {
    uint64_t topology = 0, weight = 0, input = 0, init = 0;
    bool operator==(const SeedTuple&) const = default;
};

// Stable splitmix64 mixing of (master, rho_index, realization); documented
// golden value for (0,0,0) is frozen in the tests. `init` is reserved for
// future initial-state randomization (the reservoir currently starts at 0).
SeedTuple derive_seeds(uint64_t master_seed, long rho_index,
                       long realization_index);

struct RunRecord {
    double rho = 0.0;
    int realization = 0;
    SeedTuple seeds;
    ErrorTrace trace;          // raw, truncated at divergence
    double training_error = 0.0;
    double wall_time = 0.0;
    bool failed = false;
    std::string error;
};

// Shared by every realization of a sweep; needs train_steps + horizon samples.
FieldSeries generate_truth(const SystemConfig& sys, long total_samples);

RunRecord run_single(const SweepSpec& spec, const FieldSeries& truth,
                     long rho_index, int realization);

struct SweepResult {
    ErrorSurface surface;
    std::vector<RunRecord> runs;  // ordered by (rho_index, realization)
    int failed_count = 0;
};

// Runs every (rho, realization) cell, optionally across `workers` threads.
// Results are bit-identical for any worker count: each cell is independent
// and deterministic, and aggregation is serial in sorted order. Rows where
// every run failed are filled with the divergence sentinel.
SweepResult run_sweep(const SweepSpec& spec, const FieldSeries& truth,
                      int workers = 1);

// Directory layout: surface.csv, valley.txt, runs/<rho>/<j>.csv, manifest.txt.
// manifest_text should round-trip through the config parser.
void write_results(const SweepResult& res, const SweepSpec& spec,
                   const std::string& out_dir, const std::string& manifest_text);

} // namespace rcv
