#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "codemix/normalize.hpp"

namespace {

using namespace codemix::norm;

const std::string kTweet =
    "Modiji foreign yaatra par hai!!! acha GUNDA log 123 :-) http://t.co/abc www.example.com "
    "sache sapooto aap ka balidan hamesha yaad rahega \xF0\x9F\x98\x80";

std::vector<Lexicon> bundled_lexicons() {
    const std::string dir = std::string(CODEMIX_DATA_DIR) + "/lexicons";
    return {
        Lexicon::from_file(dir + "/stopwords.tsv", LexiconKind::Stopword),
        Lexicon::from_file(dir + "/profanity.tsv", LexiconKind::Profanity),
        Lexicon::from_file(dir + "/transliteration.tsv", LexiconKind::Transliteration),
        Lexicon::from_file(dir + "/translation.tsv", LexiconKind::Translation),
        Lexicon::from_file(dir + "/variants.tsv", LexiconKind::Variant),
    };
}

void BM_Clean(benchmark::State& state) {
    NormalizerConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(clean(kTweet, cfg));
    }
}
BENCHMARK(BM_Clean);

void BM_Normalize(benchmark::State& state) {
    NormalizerConfig cfg;
    auto lexicons = bundled_lexicons();
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize(kTweet, lexicons, cfg));
    }
}
BENCHMARK(BM_Normalize);

void BM_NormalizeWithFallback(benchmark::State& state) {
    NormalizerConfig cfg;
    cfg.variant_fallback_enabled = true;
    auto lexicons = bundled_lexicons();
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize(kTweet, lexicons, cfg));
    }
}
BENCHMARK(BM_NormalizeWithFallback);

void BM_ResolveVariant(benchmark::State& state) {
    Lexicon lex(LexiconKind::Translation);
    for (int i = 0; i < state.range(0); ++i) {
        lex.add("word" + std::to_string(i), {"t"});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(resolve_variant("wird42", lex, 1));
    }
}
BENCHMARK(BM_ResolveVariant)->Arg(200)->Arg(7200);

} // namespace
