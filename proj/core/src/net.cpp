#include "codemix/net.hpp"

#include <cmath>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"

namespace codemix::net {

void NetConfig::validate() const {
    if (hidden <= 0 || h1 <= 0 || h2 <= 0) {
        fail("InvalidConfigValue", "layer widths must be > 0");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        fail("InvalidConfigValue", "dropout_rate must be in [0, 1)");
    }
    if (max_seq_len < 1) {
        fail("InvalidConfigValue", "max_seq_len must be >= 1");
    }
}

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

Eigen::VectorXd sigmoid_vec(const Eigen::VectorXd& v) {
    return v.unaryExpr([](double x) { return sigmoid(x); });
}

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double scale) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rng.uniform(-scale, scale);
        }
    }
}

} // namespace

ModelParams ModelParams::zeros(const Dims& dims, bool with_embedding, Eigen::Index vocab_size) {
    ModelParams p;
    p.dims = dims;
    const int h = dims.hidden;
    p.Wi = Eigen::MatrixXd::Zero(h, dims.input);
    p.Wf = Eigen::MatrixXd::Zero(h, dims.input);
    p.Wo = Eigen::MatrixXd::Zero(h, dims.input);
    p.Wg = Eigen::MatrixXd::Zero(h, dims.input);
    p.Ui = Eigen::MatrixXd::Zero(h, h);
    p.Uf = Eigen::MatrixXd::Zero(h, h);
    p.Uo = Eigen::MatrixXd::Zero(h, h);
    p.Ug = Eigen::MatrixXd::Zero(h, h);
    p.bi = Eigen::VectorXd::Zero(h);
    p.bf = Eigen::VectorXd::Zero(h);
    p.bo = Eigen::VectorXd::Zero(h);
    p.bg = Eigen::VectorXd::Zero(h);
    p.W1 = Eigen::MatrixXd::Zero(dims.h1, h);
    p.b1 = Eigen::VectorXd::Zero(dims.h1);
    p.W2 = Eigen::MatrixXd::Zero(dims.h2, dims.h1);
    p.b2 = Eigen::VectorXd::Zero(dims.h2);
    p.W3 = Eigen::MatrixXd::Zero(dims.classes, dims.h2);
    p.b3 = Eigen::VectorXd::Zero(dims.classes);
    if (with_embedding) {
        p.embedding = Eigen::MatrixXd::Zero(vocab_size, dims.input);
    }
    return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
    return zeros(other.dims, other.embedding.has_value(),
                 other.embedding ? other.embedding->rows() : 0);
}

ModelParams ModelParams::init(const Dims& dims, std::uint64_t seed) {
    ModelParams p = zeros(dims, false, 0);
    Rng rng(derive_seed(seed, {4}));
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(dims.input));
    const double rec_scale = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
    fill_uniform(p.Wi, rng, in_scale);
    fill_uniform(p.Wf, rng, in_scale);
    fill_uniform(p.Wo, rng, in_scale);
    fill_uniform(p.Wg, rng, in_scale);
    fill_uniform(p.Ui, rng, rec_scale);
    fill_uniform(p.Uf, rng, rec_scale);
    fill_uniform(p.Uo, rng, rec_scale);
    fill_uniform(p.Ug, rng, rec_scale);
    fill_uniform(p.W1, rng, rec_scale);
    fill_uniform(p.W2, rng, 1.0 / std::sqrt(static_cast<double>(dims.h1)));
    fill_uniform(p.W3, rng, 1.0 / std::sqrt(static_cast<double>(dims.h2)));
    // Forget-gate bias starts at 1 so early training does not flush the cell
    // state.
    p.bf.setOnes();
    return p;
}

bool ModelParams::all_finite() const {
    bool ok = true;
    for_each_tensor([&](const char*, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
}

OptimState OptimState::init(const ModelParams& params) {
    OptimState s;
    s.m = ModelParams::zeros_like(params);
    s.v = ModelParams::zeros_like(params);
    return s;
}

const Eigen::MatrixXd& embedding_for(const ModelParams& params, const Eigen::MatrixXd& emb) {
    return params.embedding ? *params.embedding : emb;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

int valid_prefix_length(const Mask& mask) {
    int n = 0;
    for (std::uint8_t m : mask) {
        if (m == 0) {
            break;
        }
        ++n;
    }
    return n;
}

} // namespace

ForwardTrace lstm_forward(const IndexSeq& indices, const Mask& mask, const Eigen::MatrixXd& emb,
                          const ModelParams& params, bool training, double dropout_rate,
                          std::uint64_t rng_seed) {
    const Eigen::MatrixXd& E = embedding_for(params, emb);
    const int steps = valid_prefix_length(mask);
    if (steps == 0) {
        fail("EmptyMask", "mask has no valid position");
    }
    const int h = params.dims.hidden;

    ForwardTrace t;
    t.steps = steps;
    t.x.reserve(steps);
    t.gi.reserve(steps);
    t.gf.reserve(steps);
    t.go.reserve(steps);
    t.gg.reserve(steps);
    t.c.reserve(steps);
    t.c_tanh.reserve(steps);
    t.h.reserve(steps);

    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
    for (int step = 0; step < steps; ++step) {
        const int idx = indices[static_cast<std::size_t>(step)];
        if (idx < 0 || idx >= E.rows()) {
            fail("IndexOutOfVocab", "token index " + std::to_string(idx) + " outside vocabulary of size " +
                                        std::to_string(E.rows()));
        }
        Eigen::VectorXd x = E.row(idx).transpose();
        Eigen::VectorXd gi = sigmoid_vec(params.Wi * x + params.Ui * h_prev + params.bi);
        Eigen::VectorXd gf = sigmoid_vec(params.Wf * x + params.Uf * h_prev + params.bf);
        Eigen::VectorXd go = sigmoid_vec(params.Wo * x + params.Uo * h_prev + params.bo);
        Eigen::VectorXd gg = (params.Wg * x + params.Ug * h_prev + params.bg).array().tanh();
        Eigen::VectorXd c = gf.cwiseProduct(c_prev) + gi.cwiseProduct(gg);
        Eigen::VectorXd c_tanh = c.array().tanh();
        Eigen::VectorXd h_cur = go.cwiseProduct(c_tanh);
        if (!c.allFinite() || !h_cur.allFinite()) {
            fail("NonFiniteActivation", "non-finite LSTM state at step " + std::to_string(step));
        }
        t.x.push_back(std::move(x));
        t.gi.push_back(std::move(gi));
        t.gf.push_back(std::move(gf));
        t.go.push_back(std::move(go));
        t.gg.push_back(std::move(gg));
        t.c.push_back(c);
        t.c_tanh.push_back(std::move(c_tanh));
        t.h.push_back(h_cur);
        c_prev = std::move(c);
        h_prev = std::move(h_cur);
    }

    // Inverted dropout on the final hidden state only.
    t.drop_mask = Eigen::VectorXd::Ones(h);
    if (training && dropout_rate > 0.0) {
        Rng rng(derive_seed(rng_seed, {5}));
        const double scale = 1.0 / (1.0 - dropout_rate);
        for (int u = 0; u < h; ++u) {
            t.drop_mask(u) = rng.next_double() < dropout_rate ? 0.0 : scale;
        }
    }
    t.h_drop = t.h.back().cwiseProduct(t.drop_mask);

    t.z1 = params.W1 * t.h_drop + params.b1;
    t.a1 = t.z1.cwiseMax(0.0);
    t.z2 = params.W2 * t.a1 + params.b2;
    t.a2 = t.z2.cwiseMax(0.0);
    t.logits = params.W3 * t.a2 + params.b3;
    if (!t.logits.allFinite()) {
        fail("NonFiniteActivation", "non-finite logits");
    }

    Eigen::VectorXd shifted = t.logits.array() - t.logits.maxCoeff();
    Eigen::VectorXd expv = shifted.array().exp();
    t.probs = expv / expv.sum();
    return t;
}

// ---------------------------------------------------------------------------
// Loss and backpropagation through time
// ---------------------------------------------------------------------------

LossAndGrads loss_and_grads(const std::vector<EncodedSample>& batch, const Eigen::MatrixXd& emb,
                            const ModelParams& params, double dropout_rate, double l2_lambda,
                            std::uint64_t rng_seed) {
    if (batch.empty()) {
        fail("EmptyDataset", "loss_and_grads needs a non-empty batch");
    }
    LossAndGrads out;
    out.grads = ModelParams::zeros_like(params);
    ModelParams& g = out.grads;
    const int h = params.dims.hidden;

    double data_loss = 0.0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const EncodedSample& sample = batch[s];
        ForwardTrace t = lstm_forward(sample.indices, sample.mask, emb, params, true, dropout_rate,
                                      derive_seed(rng_seed, {6, s}));

        double p_true = t.probs(sample.label);
        data_loss += -std::log(p_true);

        // Dense head.
        Eigen::VectorXd dz3 = t.probs;
        dz3(sample.label) -= 1.0;
        g.W3 += dz3 * t.a2.transpose();
        g.b3 += dz3;
        Eigen::VectorXd da2 = params.W3.transpose() * dz3;
        Eigen::VectorXd dz2 =
            da2.cwiseProduct((t.z2.array() > 0.0).cast<double>().matrix());
        g.W2 += dz2 * t.a1.transpose();
        g.b2 += dz2;
        Eigen::VectorXd da1 = params.W2.transpose() * dz2;
        Eigen::VectorXd dz1 =
            da1.cwiseProduct((t.z1.array() > 0.0).cast<double>().matrix());
        g.W1 += dz1 * t.h_drop.transpose();
        g.b1 += dz1;

        // Through dropout into the recurrence.
        Eigen::VectorXd dh = (params.W1.transpose() * dz1).cwiseProduct(t.drop_mask);
        Eigen::VectorXd dc = Eigen::VectorXd::Zero(h);
        const Eigen::VectorXd zero_state = Eigen::VectorXd::Zero(h);
        for (int step = t.steps - 1; step >= 0; --step) {
            const Eigen::VectorXd& c_prev = step > 0 ? t.c[static_cast<std::size_t>(step) - 1] : zero_state;
            const Eigen::VectorXd& h_prev_vec = step > 0 ? t.h[static_cast<std::size_t>(step) - 1] : zero_state;

            const auto& gi = t.gi[step];
            const auto& gf = t.gf[step];
            const auto& go = t.go[step];
            const auto& gg = t.gg[step];
            const auto& c_tanh = t.c_tanh[step];

            Eigen::VectorXd do_gate = dh.cwiseProduct(c_tanh);
            dc += dh.cwiseProduct(go).cwiseProduct(
                (1.0 - c_tanh.array().square()).matrix());

            Eigen::VectorXd di = dc.cwiseProduct(gg);
            Eigen::VectorXd dg = dc.cwiseProduct(gi);
            Eigen::VectorXd df = dc.cwiseProduct(c_prev);
            Eigen::VectorXd dc_prev = dc.cwiseProduct(gf);

            Eigen::VectorXd dai = di.cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
            Eigen::VectorXd daf = df.cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
            Eigen::VectorXd dao = do_gate.cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());
            Eigen::VectorXd dag = dg.cwiseProduct((1.0 - gg.array().square()).matrix());

            const Eigen::VectorXd& x = t.x[step];
            g.Wi += dai * x.transpose();
            g.Wf += daf * x.transpose();
            g.Wo += dao * x.transpose();
            g.Wg += dag * x.transpose();
            g.Ui += dai * h_prev_vec.transpose();
            g.Uf += daf * h_prev_vec.transpose();
            g.Uo += dao * h_prev_vec.transpose();
            g.Ug += dag * h_prev_vec.transpose();
            g.bi += dai;
            g.bf += daf;
            g.bo += dao;
            g.bg += dag;

            if (g.embedding) {
                Eigen::VectorXd dx = params.Wi.transpose() * dai + params.Wf.transpose() * daf +
                                     params.Wo.transpose() * dao + params.Wg.transpose() * dag;
                g.embedding->row(sample.indices[static_cast<std::size_t>(step)]) += dx.transpose();
            }

            dh = params.Ui.transpose() * dai + params.Uf.transpose() * daf + params.Uo.transpose() * dao +
                 params.Ug.transpose() * dag;
            dc = std::move(dc_prev);
        }
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    g.for_each_tensor([&](const char*, auto& tensor) { tensor *= inv_n; });
    out.loss = data_loss * inv_n;

    if (l2_lambda > 0.0) {
        double l2 = 0.0;
        l2 += params.Wi.squaredNorm() + params.Wf.squaredNorm() + params.Wo.squaredNorm() +
              params.Wg.squaredNorm();
        l2 += params.Ui.squaredNorm() + params.Uf.squaredNorm() + params.Uo.squaredNorm() +
              params.Ug.squaredNorm();
        l2 += params.W1.squaredNorm() + params.W2.squaredNorm() + params.W3.squaredNorm();
        out.loss += 0.5 * l2_lambda * l2;
        g.Wi += l2_lambda * params.Wi;
        g.Wf += l2_lambda * params.Wf;
        g.Wo += l2_lambda * params.Wo;
        g.Wg += l2_lambda * params.Wg;
        g.Ui += l2_lambda * params.Ui;
        g.Uf += l2_lambda * params.Uf;
        g.Uo += l2_lambda * params.Uo;
        g.Ug += l2_lambda * params.Ug;
        g.W1 += l2_lambda * params.W1;
        g.W2 += l2_lambda * params.W2;
        g.W3 += l2_lambda * params.W3;
    }

    if (!std::isfinite(out.loss)) {
        fail("NonFiniteLoss", "batch loss is not finite");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

namespace {

struct TensorRef {
    const char* name;
    double* data;
    Eigen::Index size;
};

template <class P>
std::vector<TensorRef> tensor_refs(P& p) {
    std::vector<TensorRef> refs;
    p.for_each_tensor([&](const char* name, auto& t) {
        refs.push_back({name, const_cast<double*>(t.data()), t.size()});
    });
    return refs;
}

} // namespace

void adam_step(ModelParams& params, const ModelParams& grads, OptimState& optim) {
    auto p_refs = tensor_refs(params);
    auto g_refs = tensor_refs(grads);
    auto m_refs = tensor_refs(optim.m);
    auto v_refs = tensor_refs(optim.v);
    if (p_refs.size() != g_refs.size() || p_refs.size() != m_refs.size() || p_refs.size() != v_refs.size()) {
        fail("ShapeMismatch", "parameter, gradient and moment structures differ");
    }

    optim.t += 1;
    const double bc1 = 1.0 - std::pow(optim.beta1, static_cast<double>(optim.t));
    const double bc2 = 1.0 - std::pow(optim.beta2, static_cast<double>(optim.t));

    for (std::size_t k = 0; k < p_refs.size(); ++k) {
        if (p_refs[k].size != g_refs[k].size || p_refs[k].size != m_refs[k].size ||
            p_refs[k].size != v_refs[k].size) {
            fail("ShapeMismatch", std::string("tensor '") + p_refs[k].name + "' shapes differ");
        }
        double* theta = p_refs[k].data;
        const double* grad = g_refs[k].data;
        double* m = m_refs[k].data;
        double* v = v_refs[k].data;
        for (Eigen::Index i = 0; i < p_refs[k].size; ++i) {
            m[i] = optim.beta1 * m[i] + (1.0 - optim.beta1) * grad[i];
            v[i] = optim.beta2 * v[i] + (1.0 - optim.beta2) * grad[i] * grad[i];
            double m_hat = m[i] / bc1;
            double v_hat = v[i] / bc2;
            theta[i] -= optim.lr * m_hat / (std::sqrt(v_hat) + optim.epsilon);
        }
    }
}

// ---------------------------------------------------------------------------
// Inference and encoding
// ---------------------------------------------------------------------------

Prediction predict(const IndexSeq& indices, const Mask& mask, const Eigen::MatrixXd& emb,
                   const ModelParams& params) {
    ForwardTrace t = lstm_forward(indices, mask, emb, params, false, 0.0, 0);
    Prediction out;
    out.probs = t.probs;
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
        if (t.probs(c) > t.probs(best)) {
            best = c;
        }
    }
    out.label = static_cast<CanonicalLabel>(best);
    return out;
}

EncodedSample encode_sequence(const std::vector<std::string>& tokens, const embed::Vocabulary& vocab,
                              int max_seq_len) {
    EncodedSample sample;
    sample.indices.assign(static_cast<std::size_t>(max_seq_len), embed::Vocabulary::kPad);
    sample.mask.assign(static_cast<std::size_t>(max_seq_len), 0);
    if (tokens.empty()) {
        sample.indices[0] = embed::Vocabulary::kUnk;
        sample.mask[0] = 1;
        return sample;
    }
    const std::size_t n = std::min(tokens.size(), static_cast<std::size_t>(max_seq_len));
    for (std::size_t i = 0; i < n; ++i) {
        sample.indices[i] = vocab.index_or_unk(tokens[i]);
        sample.mask[i] = 1;
    }
    return sample;
}

} // namespace codemix::net
