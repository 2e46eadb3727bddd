#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "codemix/embed.hpp"
#include "codemix/label.hpp"

namespace codemix::net {

struct NetConfig {
    int hidden = 64;
    int h1 = 64;
    int h2 = 32;
    double dropout_rate = 0.2;
    int max_seq_len = 30;
    bool embeddings_trainable = false;

    void validate() const;
};

struct Dims {
    int input = 0; // embedding dim
    int hidden = 0;
    int h1 = 0;
    int h2 = 0;
    int classes = kNumClasses;
};

// LSTM gate weights, dense layers, and (when trainable) the embedding
// matrix. The same struct holds gradients and Adam moments, which keeps
// every per-tensor operation a single visitor loop.
struct ModelParams {
    Dims dims;

    // gates: i(nput), f(orget), o(utput), g (candidate)
    Eigen::MatrixXd Wi, Wf, Wo, Wg; // hidden x input
    Eigen::MatrixXd Ui, Uf, Uo, Ug; // hidden x hidden
    Eigen::VectorXd bi, bf, bo, bg; // hidden

    Eigen::MatrixXd W1; // h1 x hidden
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2; // h2 x h1
    Eigen::VectorXd b2;
    Eigen::MatrixXd W3; // classes x h2
    Eigen::VectorXd b3;

    std::optional<Eigen::MatrixXd> embedding; // V x input, only when trainable

    static ModelParams init(const Dims& dims, std::uint64_t seed);
    static ModelParams zeros(const Dims& dims, bool with_embedding, Eigen::Index vocab_size);
    static ModelParams zeros_like(const ModelParams& other);

    bool all_finite() const;

    // Visits every tensor in a fixed order; F is called as f(name, tensor)
    // where tensor is MatrixXd& or VectorXd&.
    template <class Self, class F>
    static void visit(Self& self, F&& f) {
        f("lstm.Wi", self.Wi);
        f("lstm.Wf", self.Wf);
        f("lstm.Wo", self.Wo);
        f("lstm.Wg", self.Wg);
        f("lstm.Ui", self.Ui);
        f("lstm.Uf", self.Uf);
        f("lstm.Uo", self.Uo);
        f("lstm.Ug", self.Ug);
        f("lstm.bi", self.bi);
        f("lstm.bf", self.bf);
        f("lstm.bo", self.bo);
        f("lstm.bg", self.bg);
        f("dense.W1", self.W1);
        f("dense.b1", self.b1);
        f("dense.W2", self.W2);
        f("dense.b2", self.b2);
        f("dense.W3", self.W3);
        f("dense.b3", self.b3);
        if (self.embedding) {
            f("embedding", *self.embedding);
        }
    }

    template <class F>
    void for_each_tensor(F&& f) {
        visit(*this, std::forward<F>(f));
    }
    template <class F>
    void for_each_tensor(F&& f) const {
        visit(*this, std::forward<F>(f));
    }
};

// Adam state. L2 regularization enters through the loss (the gradients
// already include lambda * W), not as decoupled decay.
struct OptimState {
    std::uint64_t t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2_lambda = 1e-4;
    ModelParams m;
    ModelParams v;

    static OptimState init(const ModelParams& params);
};

using IndexSeq = std::vector<int>;
using Mask = std::vector<std::uint8_t>;

struct EncodedSample {
    IndexSeq indices;
    Mask mask;
    int label = 0; // CanonicalLabel code
};

// Everything the backward pass needs, captured per timestep.
struct ForwardTrace {
    int steps = 0;                       // number of valid positions
    std::vector<Eigen::VectorXd> x;      // inputs per step
    std::vector<Eigen::VectorXd> gi, gf, go, gg;
    std::vector<Eigen::VectorXd> c, c_tanh, h;
    Eigen::VectorXd drop_mask;           // inverted-dropout scale per unit
    Eigen::VectorXd h_drop;
    Eigen::VectorXd z1, a1, z2, a2, logits;
    Eigen::VectorXd probs;
};

// Runs the recurrence over the valid prefix of `indices` and the dense head
// on the last hidden state. `training` enables inverted dropout with masks
// drawn from rng_seed.
ForwardTrace lstm_forward(const IndexSeq& indices, const Mask& mask, const Eigen::MatrixXd& emb,
                          const ModelParams& params, bool training, double dropout_rate,
                          std::uint64_t rng_seed);

struct LossAndGrads {
    double loss = 0.0;
    ModelParams grads;
};

// Mean cross-entropy over the batch plus (l2_lambda/2) * sum of squared
// weight-matrix entries (biases excluded), with exact gradients from full
// backpropagation through time.
LossAndGrads loss_and_grads(const std::vector<EncodedSample>& batch, const Eigen::MatrixXd& emb,
                            const ModelParams& params, double dropout_rate, double l2_lambda,
                            std::uint64_t rng_seed);

// One Adam update; increments optim.t and updates params in place.
void adam_step(ModelParams& params, const ModelParams& grads, OptimState& optim);

struct Prediction {
    CanonicalLabel label = CanonicalLabel::Benign;
    Eigen::Vector3d probs;
};

// Inference forward pass; argmax ties break to the lowest class code.
Prediction predict(const IndexSeq& indices, const Mask& mask, const Eigen::MatrixXd& emb,
                   const ModelParams& params);

// Maps tokens to vocabulary indices (UNK for misses), truncates to
// max_seq_len keeping the head, pads with PAD. Empty input becomes a single
// UNK position.
EncodedSample encode_sequence(const std::vector<std::string>& tokens, const embed::Vocabulary& vocab,
                              int max_seq_len);

// Resolves which matrix feeds the embedding lookup: the trainable copy
// inside params when present, the external matrix otherwise.
const Eigen::MatrixXd& embedding_for(const ModelParams& params, const Eigen::MatrixXd& emb);

struct Checkpoint {
    ModelParams params;
    OptimState optim;
    NetConfig cfg;
};

// Binary checkpoint: magic "HGL1", version, config block, named tensor
// records, 64-bit FNV-1a checksum. Bit-exact round trip.
void save_checkpoint(const ModelParams& params, const OptimState& optim, const NetConfig& cfg,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace codemix::net
