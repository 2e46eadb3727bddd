#include <benchmark/benchmark.h>

#include <vector>

#include "codemix/net.hpp"
#include "codemix/rng.hpp"

namespace {

using namespace codemix;
using namespace codemix::net;

struct Fixture {
    Eigen::MatrixXd emb;
    ModelParams params;
    OptimState optim;
    std::vector<EncodedSample> batch;

    Fixture(int vocab, int dim, int hidden, int seq_len, int batch_size) {
        Rng rng(7);
        emb.resize(vocab, dim);
        for (int r = 0; r < vocab; ++r) {
            for (int c = 0; c < dim; ++c) {
                emb(r, c) = rng.uniform(-0.1, 0.1);
            }
        }
        Dims dims{dim, hidden, hidden, hidden / 2, kNumClasses};
        params = ModelParams::init(dims, 1);
        optim = OptimState::init(params);
        for (int b = 0; b < batch_size; ++b) {
            EncodedSample s;
            s.indices.resize(seq_len);
            s.mask.assign(seq_len, 1);
            for (int t = 0; t < seq_len; ++t) {
                s.indices[t] = static_cast<int>(rng.next_below(vocab));
            }
            s.label = static_cast<int>(rng.next_below(3));
            batch.push_back(std::move(s));
        }
    }
};

void BM_LstmForward(benchmark::State& state) {
    Fixture f(500, 100, 64, 30, 1);
    const auto& s = f.batch[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(lstm_forward(s.indices, s.mask, f.emb, f.params, false, 0.0, 0));
    }
}
BENCHMARK(BM_LstmForward);

void BM_LossAndGrads(benchmark::State& state) {
    Fixture f(500, 100, 64, 30, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_and_grads(f.batch, f.emb, f.params, 0.2, 1e-4, 1));
    }
}
BENCHMARK(BM_LossAndGrads)->Arg(1)->Arg(32);

void BM_AdamStep(benchmark::State& state) {
    Fixture f(500, 100, 64, 30, 4);
    auto lg = loss_and_grads(f.batch, f.emb, f.params, 0.2, 1e-4, 1);
    for (auto _ : state) {
        adam_step(f.params, lg.grads, f.optim);
        benchmark::DoNotOptimize(f.params);
    }
}
BENCHMARK(BM_AdamStep);

} // namespace
