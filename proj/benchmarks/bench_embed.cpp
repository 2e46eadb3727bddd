#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "codemix/embed.hpp"
#include "codemix/rng.hpp"

namespace {

using namespace codemix;
using namespace codemix::embed;

std::vector<norm::TokenSeq> synthetic_corpus(std::size_t sentences, std::size_t vocab_size) {
    Rng rng(42);
    std::vector<norm::TokenSeq> corpus;
    corpus.reserve(sentences);
    for (std::size_t s = 0; s < sentences; ++s) {
        norm::TokenSeq seq;
        std::size_t len = 5 + rng.next_below(15);
        for (std::size_t k = 0; k < len; ++k) {
            seq.tokens.push_back("w" + std::to_string(rng.next_below(vocab_size)));
        }
        seq.tags.assign(seq.tokens.size(), norm::TokenTag::Passed);
        corpus.push_back(std::move(seq));
    }
    return corpus;
}

void BM_CountCooccurrence(benchmark::State& state) {
    auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 200);
    auto vocab = Vocabulary::build(corpus, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(count_cooccurrence(corpus, vocab, 5));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CountCooccurrence)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

void BM_GloveEpoch(benchmark::State& state) {
    auto corpus = synthetic_corpus(256, 200);
    auto vocab = Vocabulary::build(corpus, 1);
    auto table = count_cooccurrence(corpus, vocab, 5);
    GloveConfig cfg;
    cfg.dim = 50;
    cfg.epochs = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_glove(table, vocab, cfg));
    }
}
BENCHMARK(BM_GloveEpoch);

void BM_SgnsEpoch(benchmark::State& state) {
    auto corpus = synthetic_corpus(256, 200);
    auto vocab = Vocabulary::build(corpus, 1);
    SgnsConfig cfg;
    cfg.dim = 50;
    cfg.epochs = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_sgns(corpus, vocab, cfg));
    }
}
BENCHMARK(BM_SgnsEpoch);

} // namespace
