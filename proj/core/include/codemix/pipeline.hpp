#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "codemix/net.hpp"

namespace codemix::pipeline {

struct TrainConfig {
    net::NetConfig net;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2_lambda = 1e-4;
    int batch_size = 32;
    int epochs_stage1 = 10;
    int epochs_stage2 = 10;
    double lr_stage2_scale = 0.1;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    int early_stop_patience = 3; // 0 disables early stopping

    void validate() const;
};

struct Metrics {
    double accuracy = 0.0;
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> f1{};
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{}; // [true][predicted]
    std::int64_t total = 0;
};

struct CurvePoint {
    int epoch = 0; // 0 is the pre-training evaluation
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct StageResult {
    net::ModelParams params; // best-validation checkpoint
    net::OptimState optim;
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
    std::vector<CurvePoint> curve;
};

using Dataset = std::vector<net::EncodedSample>;

struct SplitDataset {
    Dataset train;
    Dataset val;
    Dataset test;
};

struct InitState {
    net::ModelParams params;
    net::OptimState optim;
};

// Shuffled mini-batch Adam training from `init` (or a fresh seed-derived
// initialization). Returns the checkpoint with the best validation accuracy;
// ties go to the earliest epoch, with the pre-training state counting as
// epoch 0.
StageResult train_stage(const Dataset& train, const Dataset& val, const Eigen::MatrixXd& emb,
                        const std::optional<InitState>& init, const TrainConfig& cfg, int epochs, double lr,
                        std::uint64_t seed);

Metrics evaluate(const net::ModelParams& params, const Eigen::MatrixXd& emb, const Dataset& test);

struct TransferResult {
    StageResult stage1;
    StageResult stage2;
    Metrics test_metrics; // on the target test split
};

// Stage 1 trains on the source from scratch; stage 2 continues from the
// stage-1 checkpoint on the target with lr scaled by lr_stage2_scale, all
// parameters trainable, none reinitialized.
TransferResult transfer_train(const SplitDataset& source, const SplitDataset& target,
                              const Eigen::MatrixXd& emb, const TrainConfig& cfg, std::uint64_t seed);

struct SeedRun {
    std::uint64_t seed = 0;
    Metrics metrics;
};

struct RunReport {
    std::string stage; // stage1 | stage2 | scratch
    std::vector<SeedRun> runs;
    double mean_accuracy = 0.0;
    std::vector<std::pair<std::string, std::string>> config_echo;
    double wall_seconds = 0.0; // measured, intentionally not serialized
};

// Runs the experiment once per seed (in parallel when jobs > 1; results are
// per-seed deterministic either way) and averages the accuracies.
RunReport run_averaged(const std::function<Metrics(std::uint64_t)>& experiment,
                       const std::vector<std::uint64_t>& seeds, const std::string& stage_tag, int jobs = 1);

struct GridSpec {
    // Axis order is declaration order and fixes the combination order.
    std::vector<std::pair<std::string, std::vector<double>>> axes;

    void validate() const;
    std::size_t combinations() const;
};

// The grid-searchable hyperparameters.
bool is_grid_hyperparameter(const std::string& name);

// Applies one grid assignment onto a base config.
TrainConfig apply_assignment(const TrainConfig& base, const std::vector<std::pair<std::string, double>>& kv);

struct GridOutcome {
    TrainConfig best;
    std::size_t best_index = 0;
    std::vector<std::vector<std::pair<std::string, double>>> assignments;
    std::vector<RunReport> reports; // per combination, metrics on the target val split
};

// Full Cartesian product, each combination scored by mean stage-2 validation
// accuracy over cfg.seeds via transfer_train. Ties break to fewer parameters
// (hidden + h1 + h2), then lower lr, then declaration order. The test split
// is never touched.
GridOutcome grid_search(const GridSpec& grid, const TrainConfig& base, const SplitDataset& source,
                        const SplitDataset& target, const Eigen::MatrixXd& emb, int jobs = 1);

// Flat `key = value` report text: stage, per-seed metrics and confusion
// rows under `result.`, then the full config echo. Deterministic bytes;
// wall-clock time never appears.
std::string serialize_report(const RunReport& report);

// Human-readable accuracy table (one row per seed plus the mean).
std::string format_report_table(const RunReport& report);

} // namespace codemix::pipeline
