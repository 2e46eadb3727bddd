#include "codemix/embed.hpp"

#include <cmath>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"

namespace codemix::embed {

void GloveConfig::validate() const {
    if (dim <= 0) fail("InvalidConfigValue", "glove dim must be > 0");
    if (window < 1) fail("InvalidConfigValue", "glove window must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) fail("InvalidConfigValue", "glove alpha must be in (0, 1]");
    if (x_max <= 0.0) fail("InvalidConfigValue", "glove x_max must be > 0");
    if (learning_rate <= 0.0) fail("InvalidConfigValue", "glove learning_rate must be > 0");
    if (epochs < 0) fail("InvalidConfigValue", "glove epochs must be >= 0");
}

void EmbeddingMatrix::validate() const {
    if (dim <= 0) {
        fail("DimensionMismatch", "embedding dim must be > 0");
    }
    if (vectors.rows() != vocab.size() || vectors.cols() != dim) {
        fail("DimensionMismatch", "embedding matrix shape does not match vocabulary");
    }
    if (!vectors.allFinite()) {
        fail("NonFiniteLoss", "embedding matrix contains non-finite values");
    }
}

namespace {

double weighting(double x, double x_max, double alpha) {
    return x < x_max ? std::pow(x / x_max, alpha) : 1.0;
}

// Directed training examples: both (i, j) and (j, i) for distinct pairs,
// diagonal entries once.
struct Directed {
    int i;
    int j;
    double log_x;
    double fx;
};

std::vector<Directed> directed_examples(const CooccurrenceTable& table, const GloveConfig& cfg) {
    std::vector<Directed> out;
    out.reserve(table.size() * 2);
    for (const CooccurrenceTable::Entry& e : table.sorted_entries()) {
        double fx = weighting(e.weight, cfg.x_max, cfg.alpha);
        double log_x = std::log(e.weight);
        out.push_back({e.i, e.j, log_x, fx});
        if (e.i != e.j) {
            out.push_back({e.j, e.i, log_x, fx});
        }
    }
    return out;
}

} // namespace

GloveModel glove_init(int vocab_size, int dim, std::uint64_t seed) {
    GloveModel model;
    model.w.resize(vocab_size, dim);
    model.wt.resize(vocab_size, dim);
    model.b.resize(vocab_size);
    model.bt.resize(vocab_size);
    Rng rng(derive_seed(seed, {1}));
    const double scale = 0.5 / static_cast<double>(dim);
    for (int r = 0; r < vocab_size; ++r) {
        for (int c = 0; c < dim; ++c) {
            model.w(r, c) = rng.uniform(-scale, scale);
        }
    }
    for (int r = 0; r < vocab_size; ++r) {
        for (int c = 0; c < dim; ++c) {
            model.wt(r, c) = rng.uniform(-scale, scale);
        }
    }
    for (int r = 0; r < vocab_size; ++r) {
        model.b(r) = rng.uniform(-scale, scale);
    }
    for (int r = 0; r < vocab_size; ++r) {
        model.bt(r) = rng.uniform(-scale, scale);
    }
    return model;
}

double glove_loss(const CooccurrenceTable& table, const GloveModel& model, const GloveConfig& cfg) {
    double loss = 0.0;
    for (const Directed& ex : directed_examples(table, cfg)) {
        double diff = model.w.row(ex.i).dot(model.wt.row(ex.j)) + model.b(ex.i) + model.bt(ex.j) - ex.log_x;
        loss += ex.fx * diff * diff;
    }
    return loss;
}

double glove_loss_and_grads(const CooccurrenceTable& table, const GloveModel& model, const GloveConfig& cfg,
                            GloveModel& grads) {
    grads.w = Eigen::MatrixXd::Zero(model.w.rows(), model.w.cols());
    grads.wt = Eigen::MatrixXd::Zero(model.wt.rows(), model.wt.cols());
    grads.b = Eigen::VectorXd::Zero(model.b.size());
    grads.bt = Eigen::VectorXd::Zero(model.bt.size());

    double loss = 0.0;
    for (const Directed& ex : directed_examples(table, cfg)) {
        double diff = model.w.row(ex.i).dot(model.wt.row(ex.j)) + model.b(ex.i) + model.bt(ex.j) - ex.log_x;
        double coef = 2.0 * ex.fx * diff;
        loss += ex.fx * diff * diff;
        grads.w.row(ex.i) += coef * model.wt.row(ex.j);
        grads.wt.row(ex.j) += coef * model.w.row(ex.i);
        grads.b(ex.i) += coef;
        grads.bt(ex.j) += coef;
    }
    return loss;
}

EmbeddingMatrix train_glove(const CooccurrenceTable& table, const Vocabulary& vocab, const GloveConfig& cfg,
                            TrainStats* stats, GloveModel* final_model) {
    cfg.validate();
    if (table.empty()) {
        fail("EmptyCooccurrenceTable", "cannot train GloVe on an empty co-occurrence table");
    }

    const int vocab_size = vocab.size();
    GloveModel model = glove_init(vocab_size, cfg.dim, cfg.seed);

    // AdaGrad accumulators start at 1 so early updates are close to plain
    // SGD and no epsilon is needed.
    Eigen::MatrixXd acc_w = Eigen::MatrixXd::Ones(vocab_size, cfg.dim);
    Eigen::MatrixXd acc_wt = Eigen::MatrixXd::Ones(vocab_size, cfg.dim);
    Eigen::VectorXd acc_b = Eigen::VectorXd::Ones(vocab_size);
    Eigen::VectorXd acc_bt = Eigen::VectorXd::Ones(vocab_size);

    std::vector<Directed> examples = directed_examples(table, cfg);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        order[k] = k;
    }

    const double initial_loss = glove_loss(table, model, cfg);
    double epoch_loss = initial_loss;

    Eigen::VectorXd grad_w(cfg.dim), grad_wt(cfg.dim);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(epoch)}));
        shuffle_rng.shuffle(order);

        epoch_loss = 0.0;
        for (std::size_t k : order) {
            const Directed& ex = examples[k];
            double diff = model.w.row(ex.i).dot(model.wt.row(ex.j)) + model.b(ex.i) + model.bt(ex.j) - ex.log_x;
            double coef = 2.0 * ex.fx * diff;
            epoch_loss += ex.fx * diff * diff;

            grad_w = coef * model.wt.row(ex.j).transpose();
            grad_wt = coef * model.w.row(ex.i).transpose();

            for (int d = 0; d < cfg.dim; ++d) {
                model.w(ex.i, d) -= cfg.learning_rate * grad_w(d) / std::sqrt(acc_w(ex.i, d));
                acc_w(ex.i, d) += grad_w(d) * grad_w(d);
                model.wt(ex.j, d) -= cfg.learning_rate * grad_wt(d) / std::sqrt(acc_wt(ex.j, d));
                acc_wt(ex.j, d) += grad_wt(d) * grad_wt(d);
            }
            model.b(ex.i) -= cfg.learning_rate * coef / std::sqrt(acc_b(ex.i));
            acc_b(ex.i) += coef * coef;
            model.bt(ex.j) -= cfg.learning_rate * coef / std::sqrt(acc_bt(ex.j));
            acc_bt(ex.j) += coef * coef;
        }
        if (!std::isfinite(epoch_loss) || epoch_loss > 10.0 * initial_loss) {
            fail("NonFiniteLoss", "GloVe training diverged at epoch " + std::to_string(epoch) +
                                      " (loss " + std::to_string(epoch_loss) + ")");
        }
    }

    if (stats != nullptr) {
        stats->initial_loss = initial_loss;
        stats->final_loss = epoch_loss;
    }
    if (final_model != nullptr) {
        *final_model = model;
    }

    EmbeddingMatrix emb;
    emb.vocab = vocab;
    emb.dim = cfg.dim;
    emb.vectors = model.w + model.wt;
    emb.validate();
    return emb;
}

} // namespace codemix::embed
