#include "codemix/embed.hpp"

#include <algorithm>
#include <cmath>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"

namespace codemix::embed {

void SgnsConfig::validate() const {
    if (dim <= 0) fail("InvalidConfigValue", "sgns dim must be > 0");
    if (window < 1) fail("InvalidConfigValue", "sgns window must be >= 1");
    if (negatives < 1) fail("InvalidConfigValue", "sgns negatives must be >= 1");
    if (learning_rate <= 0.0) fail("InvalidConfigValue", "sgns learning_rate must be > 0");
    if (epochs < 0) fail("InvalidConfigValue", "sgns epochs must be >= 0");
    if (subsample_threshold < 0.0) fail("InvalidConfigValue", "sgns subsample_threshold must be >= 0");
}

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

// ln sigmoid(x), computed without overflow.
double log_sigmoid(double x) {
    if (x >= 0.0) {
        return -std::log1p(std::exp(-x));
    }
    return x - std::log1p(std::exp(x));
}

// Cumulative unigram^0.75 sampler over real (non-reserved) tokens.
class UnigramSampler {
public:
    UnigramSampler(const Vocabulary& vocab, double power) {
        cumulative_.resize(vocab.size(), 0.0);
        double total = 0.0;
        for (int i = 0; i < vocab.size(); ++i) {
            double weight = std::pow(static_cast<double>(vocab.count_at(i)), power);
            total += weight;
            cumulative_[i] = total;
        }
        total_ = total;
    }

    bool usable() const { return total_ > 0.0; }

    int draw(Rng& rng) const {
        double r = rng.next_double() * total_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
        if (it == cumulative_.end()) {
            return static_cast<int>(cumulative_.size()) - 1;
        }
        return static_cast<int>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

struct PreparedCorpus {
    std::vector<std::vector<int>> sentences; // in-vocabulary indices only
    std::int64_t total_tokens = 0;
};

PreparedCorpus filter_to_vocab(const std::vector<norm::TokenSeq>& corpus, const Vocabulary& vocab) {
    PreparedCorpus out;
    for (const norm::TokenSeq& seq : corpus) {
        std::vector<int> ids;
        for (const std::string& tok : seq.tokens) {
            if (vocab.contains(tok)) {
                ids.push_back(vocab.index_or_unk(tok));
            }
        }
        out.total_tokens += static_cast<std::int64_t>(ids.size());
        if (!ids.empty()) {
            out.sentences.push_back(std::move(ids));
        }
    }
    return out;
}

} // namespace

double sgns_example_loss_and_grads(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                                   const std::vector<Eigen::VectorXd>& negatives, Eigen::VectorXd& grad_center,
                                   Eigen::VectorXd& grad_context, std::vector<Eigen::VectorXd>& grad_negatives) {
    double pos_dot = center.dot(context);
    double loss = -log_sigmoid(pos_dot);

    // d/dx of -ln s(x) is s(x) - 1; for the negatives -ln s(-x) gives s(x).
    double pos_coef = sigmoid(pos_dot) - 1.0;
    grad_center = pos_coef * context;
    grad_context = pos_coef * center;

    grad_negatives.resize(negatives.size());
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        double neg_dot = center.dot(negatives[k]);
        loss -= log_sigmoid(-neg_dot);
        double neg_coef = sigmoid(neg_dot);
        grad_center += neg_coef * negatives[k];
        grad_negatives[k] = neg_coef * center;
    }
    return loss;
}

EmbeddingMatrix train_sgns(const std::vector<norm::TokenSeq>& corpus, const Vocabulary& vocab,
                           const SgnsConfig& cfg, TrainStats* stats) {
    cfg.validate();
    PreparedCorpus prepared = filter_to_vocab(corpus, vocab);
    if (prepared.sentences.empty()) {
        fail("EmptyCorpusAfterFiltering", "corpus has no in-vocabulary tokens");
    }

    const int vocab_size = vocab.size();
    Eigen::MatrixXd input(vocab_size, cfg.dim);
    Rng init_rng(derive_seed(cfg.seed, {1}));
    const double scale = 0.5 / static_cast<double>(cfg.dim);
    for (int r = 0; r < vocab_size; ++r) {
        for (int c = 0; c < cfg.dim; ++c) {
            input(r, c) = init_rng.uniform(-scale, scale);
        }
    }
    // Output (context) vectors start at zero, as in the reference word2vec.
    Eigen::MatrixXd output = Eigen::MatrixXd::Zero(vocab_size, cfg.dim);

    UnigramSampler sampler(vocab, 0.75);
    if (!sampler.usable()) {
        fail("EmptyCorpusAfterFiltering", "vocabulary has no counted tokens to sample negatives from");
    }

    const double total = static_cast<double>(prepared.total_tokens);
    auto keep_probability = [&](int id) {
        if (cfg.subsample_threshold <= 0.0) {
            return 1.0;
        }
        double f = static_cast<double>(vocab.count_at(id)) / total;
        if (f <= cfg.subsample_threshold) {
            return 1.0;
        }
        double ratio = cfg.subsample_threshold / f;
        return std::sqrt(ratio) + ratio;
    };

    // One pass: accumulate the objective, and apply SGD updates unless this
    // is the initial loss-only measurement.
    auto run_epoch = [&](std::uint64_t epoch_tag, bool update) {
        Rng rng(derive_seed(cfg.seed, {2, epoch_tag}));
        double loss = 0.0;
        std::vector<int> sent;
        Eigen::VectorXd center_delta(cfg.dim);
        for (const std::vector<int>& ids : prepared.sentences) {
            sent.clear();
            for (int id : ids) {
                if (rng.next_double() < keep_probability(id)) {
                    sent.push_back(id);
                }
            }
            const std::size_t n = sent.size();
            for (std::size_t p = 0; p < n; ++p) {
                const int center = sent[p];
                std::size_t lo = p >= static_cast<std::size_t>(cfg.window) ? p - cfg.window : 0;
                std::size_t hi = std::min(n, p + 1 + static_cast<std::size_t>(cfg.window));
                for (std::size_t q = lo; q < hi; ++q) {
                    if (q == p) {
                        continue;
                    }
                    const int context = sent[q];
                    center_delta.setZero();

                    double pos_dot = input.row(center).dot(output.row(context));
                    loss -= log_sigmoid(pos_dot);
                    double pos_coef = sigmoid(pos_dot) - 1.0;
                    center_delta += pos_coef * output.row(context).transpose();
                    if (update) {
                        output.row(context) -= cfg.learning_rate * pos_coef * input.row(center);
                    }

                    for (int k = 0; k < cfg.negatives; ++k) {
                        int neg = sampler.draw(rng);
                        double neg_dot = input.row(center).dot(output.row(neg));
                        loss -= log_sigmoid(-neg_dot);
                        double neg_coef = sigmoid(neg_dot);
                        center_delta += neg_coef * output.row(neg).transpose();
                        if (update) {
                            output.row(neg) -= cfg.learning_rate * neg_coef * input.row(center);
                        }
                    }
                    if (update) {
                        input.row(center) -= cfg.learning_rate * center_delta.transpose();
                    }
                }
            }
        }
        return loss;
    };

    const double initial_loss = run_epoch(0, false);
    double epoch_loss = initial_loss;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        epoch_loss = run_epoch(static_cast<std::uint64_t>(epoch), true);
        if (!std::isfinite(epoch_loss) || epoch_loss > 10.0 * initial_loss) {
            fail("NonFiniteLoss", "SGNS training diverged at epoch " + std::to_string(epoch) +
                                      " (loss " + std::to_string(epoch_loss) + ")");
        }
    }

    if (stats != nullptr) {
        stats->initial_loss = initial_loss;
        stats->final_loss = epoch_loss;
    }

    EmbeddingMatrix emb;
    emb.vocab = vocab;
    emb.dim = cfg.dim;
    emb.vectors = input;
    emb.validate();
    return emb;
}

} // namespace codemix::embed
