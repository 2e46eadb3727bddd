#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "codemix/vocab.hpp"

namespace codemix::embed {

// Sparse symmetric co-occurrence weights, stored once per unordered pair
// (i <= j).
class CooccurrenceTable {
public:
    struct Entry {
        int i;
        int j;
        double weight;
    };

    void add(int i, int j, double weight);
    double lookup(int i, int j) const; // 0 when absent
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    // Entries sorted by (i, j); the deterministic base order for training
    // and dumps.
    std::vector<Entry> sorted_entries() const;

    // Additive, order-independent merge (for sharded counting).
    void merge(const CooccurrenceTable& other);

    // Debug dump: lines `i j weight`, i <= j.
    void save(const std::string& path) const;

private:
    std::unordered_map<std::uint64_t, double> cells_;
};

struct EmbeddingMatrix {
    Vocabulary vocab;
    int dim = 0;
    Eigen::MatrixXd vectors; // V x dim

    void validate() const; // shape consistency, finite entries
};

struct GloveConfig {
    int dim = 100;
    int window = 5;
    double x_max = 100.0;
    double alpha = 0.75;
    double learning_rate = 0.05;
    int epochs = 25;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SgnsConfig {
    int dim = 100;
    int window = 5;
    int negatives = 5;
    double learning_rate = 0.025;
    int epochs = 5;
    double subsample_threshold = 1e-3;
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainStats {
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

// Accumulates weight 1/k for every unordered in-vocabulary pair at distance
// k <= window. Out-of-vocabulary tokens are removed before windowing and do
// not occupy positions.
CooccurrenceTable count_cooccurrence(const std::vector<norm::TokenSeq>& corpus, const Vocabulary& vocab,
                                     int window);

// GloVe working state: main and context vectors plus their biases.
struct GloveModel {
    Eigen::MatrixXd w;  // V x dim
    Eigen::MatrixXd wt; // V x dim
    Eigen::VectorXd b;  // V
    Eigen::VectorXd bt; // V
};

GloveModel glove_init(int vocab_size, int dim, std::uint64_t seed);

// Weighted least-squares objective over both directions of every stored
// pair: sum of f(X) * (w_i.wt_j + b_i + bt_j - ln X)^2.
double glove_loss(const CooccurrenceTable& table, const GloveModel& model, const GloveConfig& cfg);

// Full-batch analytic gradient of glove_loss; shares the per-entry formulas
// with the SGD trainer and exists so tests can check them against finite
// differences.
double glove_loss_and_grads(const CooccurrenceTable& table, const GloveModel& model, const GloveConfig& cfg,
                            GloveModel& grads);

// AdaGrad SGD on glove_loss. Deterministic given cfg.seed. Returns w + wt
// rows summed per token; `final_model`, when given, receives the trained
// factors for diagnostics.
EmbeddingMatrix train_glove(const CooccurrenceTable& table, const Vocabulary& vocab, const GloveConfig& cfg,
                            TrainStats* stats = nullptr, GloveModel* final_model = nullptr);

// One skip-gram negative-sampling example: -ln s(w.c) - sum ln s(-w.n).
// Gradients are written for the center row and each context/negative row;
// exposed for the finite-difference tests.
double sgns_example_loss_and_grads(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                                   const std::vector<Eigen::VectorXd>& negatives, Eigen::VectorXd& grad_center,
                                   Eigen::VectorXd& grad_context, std::vector<Eigen::VectorXd>& grad_negatives);

// Skip-gram with negative sampling over the corpus; negatives drawn from the
// unigram^0.75 distribution. Deterministic given cfg.seed. Returns the input
// vectors.
EmbeddingMatrix train_sgns(const std::vector<norm::TokenSeq>& corpus, const Vocabulary& vocab,
                           const SgnsConfig& cfg, TrainStats* stats = nullptr);

// Text format: header `V d`, then one `token v1 .. vd` line per row, floats
// in shortest round-trip decimal. Files saved here start with the reserved
// <pad>/<unk> rows; third-party files without them get the two rows
// prepended on load (<pad> zeros, <unk> the mean vector).
void save_embeddings(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix load_embeddings(const std::string& path);

} // namespace codemix::embed
