#include "codemix/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"

namespace codemix::pipeline {

void TrainConfig::validate() const {
    net.validate();
    if (lr <= 0.0) fail("InvalidConfigValue", "lr must be > 0");
    if (l2_lambda < 0.0) fail("InvalidConfigValue", "l2_lambda must be >= 0");
    if (batch_size < 1) fail("InvalidConfigValue", "batch_size must be >= 1");
    if (epochs_stage1 < 0 || epochs_stage2 < 0) fail("InvalidConfigValue", "epochs must be >= 0");
    if (lr_stage2_scale <= 0.0) fail("InvalidConfigValue", "lr_stage2_scale must be > 0");
    if (seeds.empty()) fail("InvalidConfigValue", "seeds must be non-empty");
    if (early_stop_patience < 0) fail("InvalidConfigValue", "early_stop_patience must be >= 0");
}

namespace {

double dataset_accuracy(const net::ModelParams& params, const Eigen::MatrixXd& emb, const Dataset& data) {
    std::int64_t correct = 0;
    for (const net::EncodedSample& s : data) {
        net::Prediction p = net::predict(s.indices, s.mask, emb, params);
        if (static_cast<int>(p.label) == s.label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Mean loss over the dataset without updates or dropout, for the epoch-0
// curve entry.
double dataset_loss(const net::ModelParams& params, const Eigen::MatrixXd& emb, const Dataset& data,
                    double l2_lambda) {
    net::LossAndGrads lg = net::loss_and_grads(data, emb, params, 0.0, l2_lambda, 0);
    return lg.loss;
}

} // namespace

StageResult train_stage(const Dataset& train, const Dataset& val, const Eigen::MatrixXd& emb,
                        const std::optional<InitState>& init, const TrainConfig& cfg, int epochs, double lr,
                        std::uint64_t seed) {
    cfg.validate();
    if (train.empty()) {
        fail("EmptyDataset", "training split is empty");
    }
    if (val.empty()) {
        fail("EmptyDataset", "validation split is empty");
    }

    net::ModelParams params;
    net::OptimState optim;
    if (init) {
        params = init->params;
        optim = init->optim;
    } else {
        net::Dims dims;
        dims.input = static_cast<int>(emb.cols());
        dims.hidden = cfg.net.hidden;
        dims.h1 = cfg.net.h1;
        dims.h2 = cfg.net.h2;
        params = net::ModelParams::init(dims, seed);
        if (cfg.net.embeddings_trainable) {
            params.embedding = emb;
        }
        optim = net::OptimState::init(params);
        optim.beta1 = cfg.beta1;
        optim.beta2 = cfg.beta2;
        optim.epsilon = cfg.epsilon;
        optim.l2_lambda = cfg.l2_lambda;
    }
    optim.lr = lr;

    StageResult result;
    result.curve.push_back({0, dataset_loss(params, emb, train, optim.l2_lambda),
                            dataset_accuracy(params, emb, val)});
    result.params = params;
    result.optim = optim;
    result.best_epoch = 0;
    result.best_val_accuracy = result.curve[0].val_accuracy;

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }

    int epochs_since_best = 0;
    std::vector<net::EncodedSample> batch;
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(seed, {7, static_cast<std::uint64_t>(epoch)}));
        shuffle_rng.shuffle(order);

        double epoch_loss_sum = 0.0;
        std::size_t cursor = 0;
        std::size_t batch_index = 0;
        while (cursor < order.size()) {
            batch.clear();
            for (std::size_t k = 0; k < static_cast<std::size_t>(cfg.batch_size) && cursor < order.size();
                 ++k, ++cursor) {
                batch.push_back(train[order[cursor]]);
            }
            net::LossAndGrads lg =
                net::loss_and_grads(batch, emb, params, cfg.net.dropout_rate, optim.l2_lambda,
                                    derive_seed(seed, {8, static_cast<std::uint64_t>(epoch), batch_index}));
            net::adam_step(params, lg.grads, optim);
            epoch_loss_sum += lg.loss * static_cast<double>(batch.size());
            ++batch_index;
        }

        CurvePoint point;
        point.epoch = epoch;
        point.train_loss = epoch_loss_sum / static_cast<double>(train.size());
        point.val_accuracy = dataset_accuracy(params, emb, val);
        result.curve.push_back(point);

        if (point.val_accuracy > result.best_val_accuracy) {
            result.best_val_accuracy = point.val_accuracy;
            result.best_epoch = epoch;
            result.params = params;
            result.optim = optim;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (cfg.early_stop_patience > 0 && epochs_since_best >= cfg.early_stop_patience) {
                break;
            }
        }
    }
    return result;
}

Metrics evaluate(const net::ModelParams& params, const Eigen::MatrixXd& emb, const Dataset& test) {
    if (test.empty()) {
        fail("EmptyDataset", "evaluation set is empty");
    }
    Metrics m;
    m.total = static_cast<std::int64_t>(test.size());
    for (const net::EncodedSample& s : test) {
        net::Prediction p = net::predict(s.indices, s.mask, emb, params);
        ++m.confusion[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(p.label)];
    }
    std::int64_t trace = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        trace += m.confusion[c][c];
    }
    m.accuracy = static_cast<double>(trace) / static_cast<double>(m.total);
    for (int c = 0; c < kNumClasses; ++c) {
        std::int64_t tp = m.confusion[c][c];
        std::int64_t predicted = 0, actual = 0;
        for (int k = 0; k < kNumClasses; ++k) {
            predicted += m.confusion[k][c];
            actual += m.confusion[c][k];
        }
        m.precision[c] = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        m.recall[c] = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
        double pr = m.precision[c] + m.recall[c];
        m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
    }
    return m;
}

TransferResult transfer_train(const SplitDataset& source, const SplitDataset& target,
                              const Eigen::MatrixXd& emb, const TrainConfig& cfg, std::uint64_t seed) {
    TransferResult result;
    result.stage1 = train_stage(source.train, source.val, emb, std::nullopt, cfg, cfg.epochs_stage1, cfg.lr, seed);

    InitState init{result.stage1.params, result.stage1.optim};
    result.stage2 = train_stage(target.train, target.val, emb, init, cfg, cfg.epochs_stage2,
                                cfg.lr * cfg.lr_stage2_scale, derive_seed(seed, {9}));

    result.test_metrics = evaluate(result.stage2.params, emb, target.test);
    return result;
}

RunReport run_averaged(const std::function<Metrics(std::uint64_t)>& experiment,
                       const std::vector<std::uint64_t>& seeds, const std::string& stage_tag, int jobs) {
    if (seeds.empty()) {
        fail("InvalidConfigValue", "run_averaged needs at least one seed");
    }
    auto start = std::chrono::steady_clock::now();

    RunReport report;
    report.stage = stage_tag;
    report.runs.resize(seeds.size());

    if (jobs <= 1 || seeds.size() == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            report.runs[i] = {seeds[i], experiment(seeds[i])};
        }
    } else {
        // Seeds are independent runs; parallelism does not change any
        // per-seed result.
        std::vector<std::exception_ptr> errors(seeds.size());
        std::vector<std::thread> workers;
        std::size_t stride = static_cast<std::size_t>(jobs);
        for (std::size_t w = 0; w < stride && w < seeds.size(); ++w) {
            workers.emplace_back([&, w]() {
                for (std::size_t i = w; i < seeds.size(); i += stride) {
                    try {
                        report.runs[i] = {seeds[i], experiment(seeds[i])};
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : workers) {
            t.join();
        }
        for (std::exception_ptr& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    double sum = 0.0;
    for (const SeedRun& run : report.runs) {
        sum += run.metrics.accuracy;
    }
    report.mean_accuracy = sum / static_cast<double>(report.runs.size());
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

bool is_grid_hyperparameter(const std::string& name) {
    static const char* kNames[] = {"lr",         "l2_lambda",     "hidden",        "h1",
                                   "h2",         "dropout_rate",  "batch_size",    "epochs_stage1",
                                   "epochs_stage2", "lr_stage2_scale"};
    for (const char* n : kNames) {
        if (name == n) {
            return true;
        }
    }
    return false;
}

void GridSpec::validate() const {
    for (const auto& [name, values] : axes) {
        if (!is_grid_hyperparameter(name)) {
            fail("UnknownHyperparameter", "'" + name + "' is not a grid-searchable hyperparameter");
        }
        if (values.empty()) {
            fail("InvalidConfigValue", "grid axis '" + name + "' has no candidate values");
        }
    }
    for (std::size_t i = 0; i < axes.size(); ++i) {
        for (std::size_t j = i + 1; j < axes.size(); ++j) {
            if (axes[i].first == axes[j].first) {
                fail("DuplicateKey", "grid axis '" + axes[i].first + "' listed twice");
            }
        }
    }
}

std::size_t GridSpec::combinations() const {
    std::size_t n = 1;
    for (const auto& [name, values] : axes) {
        n *= values.size();
    }
    return n;
}

TrainConfig apply_assignment(const TrainConfig& base, const std::vector<std::pair<std::string, double>>& kv) {
    TrainConfig cfg = base;
    for (const auto& [name, value] : kv) {
        if (name == "lr") {
            cfg.lr = value;
        } else if (name == "l2_lambda") {
            cfg.l2_lambda = value;
        } else if (name == "hidden") {
            cfg.net.hidden = static_cast<int>(value);
        } else if (name == "h1") {
            cfg.net.h1 = static_cast<int>(value);
        } else if (name == "h2") {
            cfg.net.h2 = static_cast<int>(value);
        } else if (name == "dropout_rate") {
            cfg.net.dropout_rate = value;
        } else if (name == "batch_size") {
            cfg.batch_size = static_cast<int>(value);
        } else if (name == "epochs_stage1") {
            cfg.epochs_stage1 = static_cast<int>(value);
        } else if (name == "epochs_stage2") {
            cfg.epochs_stage2 = static_cast<int>(value);
        } else if (name == "lr_stage2_scale") {
            cfg.lr_stage2_scale = value;
        } else {
            fail("UnknownHyperparameter", "'" + name + "' is not a grid-searchable hyperparameter");
        }
    }
    return cfg;
}

GridOutcome grid_search(const GridSpec& grid, const TrainConfig& base, const SplitDataset& source,
                        const SplitDataset& target, const Eigen::MatrixXd& emb, int jobs) {
    grid.validate();
    base.validate();

    // Enumerate the Cartesian product in declaration order (first axis
    // outermost).
    std::vector<std::vector<std::pair<std::string, double>>> assignments;
    std::vector<std::pair<std::string, double>> current;
    std::function<void(std::size_t)> enumerate = [&](std::size_t axis) {
        if (axis == grid.axes.size()) {
            assignments.push_back(current);
            return;
        }
        for (double value : grid.axes[axis].second) {
            current.emplace_back(grid.axes[axis].first, value);
            enumerate(axis + 1);
            current.pop_back();
        }
    };
    enumerate(0);

    GridOutcome outcome;
    outcome.assignments = assignments;
    outcome.reports.resize(assignments.size());

    for (std::size_t i = 0; i < assignments.size(); ++i) {
        TrainConfig cfg = apply_assignment(base, assignments[i]);
        cfg.validate();
        auto experiment = [&](std::uint64_t seed) -> Metrics {
            TransferResult r = transfer_train(source, target, emb, cfg, seed);
            // Selection metric only; the test split stays untouched.
            return evaluate(r.stage2.params, emb, target.val);
        };
        outcome.reports[i] = run_averaged(experiment, cfg.seeds, "stage2", jobs);
        for (const auto& [name, value] : assignments[i]) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", value);
            outcome.reports[i].config_echo.emplace_back("grid." + name, buf);
        }
    }

    std::size_t best = 0;
    auto better = [&](std::size_t a, std::size_t b) {
        const RunReport& ra = outcome.reports[a];
        const RunReport& rb = outcome.reports[b];
        if (ra.mean_accuracy != rb.mean_accuracy) {
            return ra.mean_accuracy > rb.mean_accuracy;
        }
        TrainConfig ca = apply_assignment(base, assignments[a]);
        TrainConfig cb = apply_assignment(base, assignments[b]);
        int sa = ca.net.hidden + ca.net.h1 + ca.net.h2;
        int sb = cb.net.hidden + cb.net.h1 + cb.net.h2;
        if (sa != sb) {
            return sa < sb;
        }
        if (ca.lr != cb.lr) {
            return ca.lr < cb.lr;
        }
        return a < b;
    };
    for (std::size_t i = 1; i < assignments.size(); ++i) {
        if (better(i, best)) {
            best = i;
        }
    }
    outcome.best_index = best;
    outcome.best = apply_assignment(base, assignments[best]);
    return outcome;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

} // namespace

std::string serialize_report(const RunReport& report) {
    std::string out;
    out += "# codemix run report\n";
    out += "stage = " + report.stage + "\n";
    out += "result.mean_accuracy = " + format_double(report.mean_accuracy) + "\n";
    {
        std::string seeds;
        for (std::size_t i = 0; i < report.runs.size(); ++i) {
            if (i > 0) {
                seeds += ",";
            }
            seeds += std::to_string(report.runs[i].seed);
        }
        out += "result.seeds = " + seeds + "\n";
    }
    for (const SeedRun& run : report.runs) {
        const std::string prefix = "result.seed." + std::to_string(run.seed) + ".";
        out += prefix + "accuracy = " + format_double(run.metrics.accuracy) + "\n";
        out += prefix + "total = " + std::to_string(run.metrics.total) + "\n";
        for (int c = 0; c < kNumClasses; ++c) {
            const char* name = label_name(static_cast<CanonicalLabel>(c));
            out += prefix + "precision." + name + " = " + format_double(run.metrics.precision[c]) + "\n";
            out += prefix + "recall." + name + " = " + format_double(run.metrics.recall[c]) + "\n";
            out += prefix + "f1." + name + " = " + format_double(run.metrics.f1[c]) + "\n";
        }
        for (int c = 0; c < kNumClasses; ++c) {
            const char* name = label_name(static_cast<CanonicalLabel>(c));
            std::string row;
            for (int k = 0; k < kNumClasses; ++k) {
                if (k > 0) {
                    row += " ";
                }
                row += std::to_string(run.metrics.confusion[c][k]);
            }
            out += prefix + "confusion." + name + " = " + row + "\n";
        }
    }
    out += "# effective configuration\n";
    for (const auto& [key, value] : report.config_echo) {
        out += key + " = " + value + "\n";
    }
    return out;
}

std::string format_report_table(const RunReport& report) {
    char buf[96];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-24s%s\n", "run", "accuracy");
    out += buf;
    for (const SeedRun& run : report.runs) {
        std::string label = "seed " + std::to_string(run.seed);
        std::snprintf(buf, sizeof(buf), "%-24s%.4f\n", label.c_str(), run.metrics.accuracy);
        out += buf;
    }
    std::string mean_label = "mean (" + std::to_string(report.runs.size()) + " runs)";
    std::snprintf(buf, sizeof(buf), "%-24s%.4f\n", mean_label.c_str(), report.mean_accuracy);
    out += buf;
    return out;
}

} // namespace codemix::pipeline
