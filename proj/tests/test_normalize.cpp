#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "codemix/normalize.hpp"
#include "codemix/rng.hpp"
#include "test_util.hpp"

using namespace codemix;
using namespace codemix::norm;
using testutil::TempDir;
using testutil::error_code_of;
using testutil::write_file;

namespace {

// Independent oracle: textbook full-matrix Levenshtein, no banding, no
// early exits.
int oracle_levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
        }
    }
    return d[a.size()][b.size()];
}

Lexicon table1_translation() {
    Lexicon lex(LexiconKind::Translation);
    lex.add("acha", {"good"});
    lex.add("gunda", {"thug"});
    return lex;
}

std::string random_token(Rng& rng) {
    static const char alphabet[] = "abcdefgh";
    std::string tok;
    std::size_t len = 1 + rng.next_below(7);
    for (std::size_t i = 0; i < len; ++i) {
        tok.push_back(alphabet[rng.next_below(sizeof(alphabet) - 1)]);
    }
    return tok;
}

} // namespace

TEST_CASE("clean applies the removal rules") {
    NormalizerConfig cfg;
    CHECK(clean("Bik gya Porkistan!!! \xF0\x9F\x98\x80 http://t.co/ab", cfg) == "bik gya porkistan");
    CHECK(clean("", cfg) == "");
    CHECK(clean("123 ... !!!", cfg) == "");
    CHECK(clean("  A   B\t\nC ", cfg) == "a b c");
    CHECK(clean("don't STOP", cfg) == "don't stop");
    CHECK(clean("s**la word", cfg) == "s**la word");
    CHECK(clean("www.example.com and https://x.y", cfg) == "and");
    CHECK(clean("happy :-) xD", cfg) == "happy");
    CHECK(clean("porkistan123 42", cfg) == "porkistan123");
}

TEST_CASE("clean honors individual flags") {
    NormalizerConfig keep_urls;
    keep_urls.remove_urls = false;
    CHECK(clean("go www.x.co now", keep_urls) == "go www x co now"); // punctuation still strips dots

    NormalizerConfig keep_numbers;
    keep_numbers.remove_numbers = false;
    CHECK(clean("top 10 list", keep_numbers) == "top 10 list");

    NormalizerConfig keep_punct;
    keep_punct.remove_punctuation = false;
    CHECK(clean("wow!!", keep_punct) == "wow!!");
}

TEST_CASE("clean rejects invalid UTF-8") {
    NormalizerConfig cfg;
    CHECK(error_code_of([&] { clean("ab\xFF", cfg); }) == "InvalidUtf8");
    CHECK(error_code_of([&] { clean("\xC3", cfg); }) == "InvalidUtf8");          // truncated
    CHECK(error_code_of([&] { clean("\xC0\xAF", cfg); }) == "InvalidUtf8");      // overlong
    CHECK(error_code_of([&] { clean("\xED\xA0\x80", cfg); }) == "InvalidUtf8");  // surrogate
}

TEST_CASE("clean is idempotent on random inputs under random flag sets") {
    std::vector<std::string> pieces = {
        "Hello",   "WORLD",  "don't",    "123",     "admi\xC3\xA9", // é
        ":-)",     "xD",     "http://t.co/abc", "www.go.in",  "!!!",
        "\xF0\x9F\x98\x80" /* emoji */, "a1b2", "...", "s**la", "<3",
        "42",      "yatra,", "#tag",     "@user",   "\xE0\xA4\x95" /* Devanagari ka */,
    };
    Rng rng(99);
    for (int trial = 0; trial < 400; ++trial) {
        std::string text;
        std::size_t n = rng.next_below(12);
        for (std::size_t i = 0; i < n; ++i) {
            text += pieces[rng.next_below(pieces.size())];
            if (rng.next_below(4) != 0) {
                text += ' ';
            }
        }
        NormalizerConfig cfg;
        cfg.remove_urls = rng.next_below(2) == 0;
        cfg.remove_numbers = rng.next_below(2) == 0;
        cfg.remove_punctuation = rng.next_below(2) == 0;
        cfg.remove_emoticons = rng.next_below(2) == 0;
        std::string once = clean(text, cfg);
        CHECK(clean(once, cfg) == once);
    }
}

TEST_CASE("tokenize splits on whitespace and tags Passed") {
    TokenSeq seq = tokenize("bik gya porkistan");
    CHECK(seq.tokens == std::vector<std::string>{"bik", "gya", "porkistan"});
    CHECK(seq.tags == std::vector<TokenTag>(3, TokenTag::Passed));
    CHECK(tokenize("").tokens.empty());
    CHECK(tokenize("a  b").tokens == std::vector<std::string>{"a", "b"});
}

TEST_CASE("apply_lexicons: table-1 lookups, unknown passthrough") {
    Lexicon lex = table1_translation();
    NormalizerConfig cfg;
    TokenSeq seq = tokenize("acha gunda zzqq");
    TokenSeq out = apply_lexicons(seq, {lex}, cfg);
    REQUIRE(out.tokens == std::vector<std::string>{"good", "thug", "zzqq"});
    CHECK(out.tags[0] == TokenTag::Translated);
    CHECK(out.tags[1] == TokenTag::Translated);
    CHECK(out.tags[2] == TokenTag::Unknown);
}

TEST_CASE("apply_lexicons: stopwords delete, profanity maps before translation") {
    Lexicon stop(LexiconKind::Stopword);
    stop.add("hai", {});
    Lexicon prof(LexiconKind::Profanity);
    prof.add("s**la", {"blo*dy"});
    Lexicon trans = table1_translation();

    NormalizerConfig cfg;
    TokenSeq out = apply_lexicons(tokenize("s**la gunda hai"), {trans, stop, prof}, cfg);
    CHECK(out.tokens == std::vector<std::string>{"blo*dy", "thug"});
    CHECK(out.tags[0] == TokenTag::ProfanityMapped);
    CHECK(out.tags[1] == TokenTag::Translated);
}

TEST_CASE("apply_lexicons: multi-token targets splice in place") {
    Lexicon trans(LexiconKind::Translation);
    trans.add("modiji", {"mr", "modi"});
    trans.add("acha", {"good"});
    NormalizerConfig cfg;
    TokenSeq out = apply_lexicons(tokenize("modiji acha"), {trans}, cfg);
    CHECK(out.tokens == std::vector<std::string>{"mr", "modi", "good"});
    CHECK(out.tags == std::vector<TokenTag>{TokenTag::Translated, TokenTag::Translated, TokenTag::Translated});
}

TEST_CASE("apply_lexicons: transliteration cascades into translation") {
    Lexicon translit(LexiconKind::Transliteration);
    translit.add("achha", {"acha"});
    Lexicon trans = table1_translation();
    NormalizerConfig cfg;
    TokenSeq out = apply_lexicons(tokenize("achha"), {translit, trans}, cfg);
    CHECK(out.tokens == std::vector<std::string>{"good"});
    CHECK(out.tags[0] == TokenTag::Translated);
}

TEST_CASE("apply_lexicons: explicit order naming a missing kind fails") {
    NormalizerConfig cfg;
    cfg.lexicon_order = {LexiconKind::Stopword, LexiconKind::Translation};
    Lexicon trans = table1_translation();
    CHECK(error_code_of([&] { apply_lexicons(tokenize("acha"), {trans}, cfg); }) == "MissingLexiconKind");
}

TEST_CASE("apply_lexicons: remove_stopwords=false keeps stopwords") {
    Lexicon stop(LexiconKind::Stopword);
    stop.add("hai", {});
    NormalizerConfig cfg;
    cfg.remove_stopwords = false;
    TokenSeq out = apply_lexicons(tokenize("hai"), {stop}, cfg);
    REQUIRE(out.tokens == std::vector<std::string>{"hai"});
    CHECK(out.tags[0] == TokenTag::Unknown);
}

TEST_CASE("resolve_variant: closest key within the edit budget") {
    Lexicon lex(LexiconKind::Translation);
    lex.add("yatra", {"tour"});
    lex.add("matra", {"measure"});

    auto m = resolve_variant("yaatra", lex, 1);
    REQUIRE(m.has_value());
    CHECK(m->key == "yatra");
    CHECK(m->distance == 1);

    CHECK_FALSE(resolve_variant("xyzzy", lex, 1).has_value());
    CHECK_FALSE(resolve_variant("yaatra", lex, 0).has_value());
}

TEST_CASE("resolve_variant tie-breaks: shorter key, then lexicographic") {
    Lexicon lex(LexiconKind::Translation);
    lex.add("abcd", {"x"});
    lex.add("abc", {"y"});
    lex.add("abd", {"z"});
    // "abz" is distance 1 from both "abc" and "abd" (same length); "abcd"
    // is distance 2.
    auto m = resolve_variant("abz", lex, 2);
    REQUIRE(m.has_value());
    CHECK(m->key == "abc");
    CHECK(m->distance == 1);
}

TEST_CASE("resolve_variant agrees with the brute-force oracle") {
    Rng rng(2024);
    Lexicon lex(LexiconKind::Translation);
    std::vector<std::string> keys;
    while (keys.size() < 200) {
        std::string k = random_token(rng);
        if (lex.find(k) == nullptr) {
            lex.add(k, {"t"});
            keys.push_back(k);
        }
    }
    for (int trial = 0; trial < 300; ++trial) {
        std::string token = random_token(rng);
        if (lex.find(token) != nullptr) {
            continue; // exact keys are excluded by precondition
        }
        int maxd = 1 + static_cast<int>(rng.next_below(3));
        auto got = resolve_variant(token, lex, maxd);

        int best = 1 << 20;
        for (const std::string& k : keys) {
            best = std::min(best, oracle_levenshtein(token, k));
        }
        if (best > maxd) {
            CHECK_FALSE(got.has_value());
        } else {
            REQUIRE(got.has_value());
            CHECK(got->distance == best);
            CHECK(oracle_levenshtein(token, got->key) == best);
        }
    }
}

TEST_CASE("levenshtein basics") {
    CHECK(levenshtein("", "") == 0);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("yatra", "yaatraa") == 2);
}

TEST_CASE("normalize composes clean, tokenize and lexicons") {
    Lexicon lex = table1_translation();
    NormalizerConfig cfg;
    CHECK(normalize("acha GUNDA!!", {lex}, cfg).tokens == std::vector<std::string>{"good", "thug"});
    CHECK(normalize("", {lex}, cfg).tokens.empty());
    CHECK(normalize("http://x.co 42", {lex}, cfg).tokens.empty());
}

TEST_CASE("normalize with variant fallback rewrites near-miss tokens") {
    Lexicon translit(LexiconKind::Transliteration);
    translit.add("yaatraa", {"yatra"});
    Lexicon trans(LexiconKind::Translation);
    trans.add("yatra", {"tour"});

    NormalizerConfig off;
    CHECK(normalize("yatraa", {translit, trans}, off).tags[0] == TokenTag::Unknown);

    NormalizerConfig on;
    on.variant_fallback_enabled = true;
    on.variant_max_edit_distance = 1;
    TokenSeq out = normalize("yatraa", {translit, trans}, on);
    // yatraa -> (fuzzy) yaatraa -> yatra -> (cascade) tour
    REQUIRE(out.tokens == std::vector<std::string>{"tour"});
    CHECK(out.tags[0] == TokenTag::VariantResolved);
}

TEST_CASE("variant fallback never deletes via the stopword lexicon") {
    Lexicon stop(LexiconKind::Stopword);
    stop.add("hai", {});
    NormalizerConfig on;
    on.variant_fallback_enabled = true;
    TokenSeq out = normalize("hair", {stop}, on);
    REQUIRE(out.tokens == std::vector<std::string>{"hair"});
    CHECK(out.tags[0] == TokenTag::Unknown);
}

TEST_CASE("load_lexicon parses, lowercases, and validates") {
    TempDir tmp("lexicon");
    write_file(tmp.file("t.tsv"), "# dictionary\nAcha\tGood\ngunda\tthug\nmodiji\tmr modi\n");
    Lexicon lex = Lexicon::from_file(tmp.file("t.tsv"), LexiconKind::Translation);
    CHECK(lex.size() == 3);
    CHECK(*lex.find("acha") == std::vector<std::string>{"good"});
    CHECK(*lex.find("modiji") == std::vector<std::string>{"mr", "modi"});
    CHECK(lex.keys() == std::vector<std::string>{"acha", "gunda", "modiji"});

    write_file(tmp.file("dup.tsv"), "acha\tgood\nacha\tfine\n");
    CHECK(error_code_of([&] { Lexicon::from_file(tmp.file("dup.tsv"), LexiconKind::Translation); }) ==
          "DuplicateKey");

    write_file(tmp.file("stop.tsv"), "hai\t\n");
    Lexicon stop = Lexicon::from_file(tmp.file("stop.tsv"), LexiconKind::Stopword);
    CHECK(stop.find("hai") != nullptr);
    CHECK(stop.find("hai")->empty());

    write_file(tmp.file("empty_target.tsv"), "acha\t\n");
    CHECK(error_code_of([&] { Lexicon::from_file(tmp.file("empty_target.tsv"), LexiconKind::Translation); }) ==
          "EmptyTargetForNonStopword");

    write_file(tmp.file("notab.tsv"), "acha good\n");
    CHECK(error_code_of([&] { Lexicon::from_file(tmp.file("notab.tsv"), LexiconKind::Translation); }) ==
          "MalformedLine");

    write_file(tmp.file("badchar.tsv"), "acha\tg@@d\n");
    CHECK(error_code_of([&] { Lexicon::from_file(tmp.file("badchar.tsv"), LexiconKind::Translation); }) ==
          "MalformedLine");

    write_file(tmp.file("stop_target.tsv"), "hai\tis\n");
    CHECK(error_code_of([&] { Lexicon::from_file(tmp.file("stop_target.tsv"), LexiconKind::Stopword); }) ==
          "MalformedLine");
}

TEST_CASE("bundled lexicons load and keep invariants on random text") {
    const std::string dir = std::string(CODEMIX_DATA_DIR) + "/lexicons";
    Lexicon stop = Lexicon::from_file(dir + "/stopwords.tsv", LexiconKind::Stopword);
    Lexicon prof = Lexicon::from_file(dir + "/profanity.tsv", LexiconKind::Profanity);
    Lexicon translit = Lexicon::from_file(dir + "/transliteration.tsv", LexiconKind::Transliteration);
    Lexicon trans = Lexicon::from_file(dir + "/translation.tsv", LexiconKind::Translation);
    Lexicon variants = Lexicon::from_file(dir + "/variants.tsv", LexiconKind::Variant);
    std::vector<Lexicon> lexicons{stop, prof, translit, trans, variants};

    std::vector<std::string> words;
    for (const auto* lex : {&stop, &prof, &translit, &trans, &variants}) {
        words.insert(words.end(), lex->keys().begin(), lex->keys().end());
    }
    words.insert(words.end(), {"Porkistan!!!", "1947", "http://t.co/x", ":-)", "UNKNOWNWORD"});

    NormalizerConfig cfg;
    cfg.variant_fallback_enabled = true;
    Rng rng(5);
    for (int trial = 0; trial < 120; ++trial) {
        std::string text;
        std::size_t n = rng.next_below(14);
        for (std::size_t i = 0; i < n; ++i) {
            text += words[rng.next_below(words.size())];
            text += ' ';
        }
        TokenSeq out = normalize(text, lexicons, cfg);
        REQUIRE(out.tokens.size() == out.tags.size());
        for (std::size_t i = 0; i < out.tokens.size(); ++i) {
            // character-set invariant
            for (char ch : out.tokens[i]) {
                bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '\'' || ch == '*';
                CHECK(ok);
            }
            // stopword deletion invariant
            CHECK(stop.find(out.tokens[i]) == nullptr);
        }
        // determinism
        TokenSeq again = normalize(text, lexicons, cfg);
        CHECK(out.tokens == again.tokens);
    }
}
