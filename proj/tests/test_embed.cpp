#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "codemix/embed.hpp"
#include "codemix/rng.hpp"
#include "test_util.hpp"

using namespace codemix;
using namespace codemix::embed;
using testutil::TempDir;
using testutil::error_code_of;
using testutil::read_file;
using testutil::write_file;

namespace {

norm::TokenSeq seq_of(const std::vector<std::string>& tokens) {
    norm::TokenSeq s;
    s.tokens = tokens;
    s.tags.assign(tokens.size(), norm::TokenTag::Passed);
    return s;
}

// Independent oracle: enumerate every position pair in every sequence after
// dropping out-of-vocabulary tokens, and accumulate 1/distance into an
// ordered map keyed by the unordered index pair.
std::map<std::pair<int, int>, double> oracle_cooccurrence(const std::vector<norm::TokenSeq>& corpus,
                                                          const Vocabulary& vocab, int window) {
    std::map<std::pair<int, int>, double> table;
    for (const auto& seq : corpus) {
        std::vector<int> ids;
        for (const auto& tok : seq.tokens) {
            if (vocab.contains(tok)) {
                ids.push_back(vocab.index_or_unk(tok));
            }
        }
        for (std::size_t p = 0; p < ids.size(); ++p) {
            for (std::size_t q = p + 1; q < ids.size(); ++q) {
                if (q - p > static_cast<std::size_t>(window)) {
                    continue;
                }
                int i = std::min(ids[p], ids[q]);
                int j = std::max(ids[p], ids[q]);
                table[{i, j}] += 1.0 / static_cast<double>(q - p);
            }
        }
    }
    return table;
}

// |a-b| relative to the larger magnitude, with an absolute escape at the
// finite-difference noise floor.
bool grad_close(double analytic, double numeric) {
    double diff = std::abs(analytic - numeric);
    if (diff <= 1e-8) {
        return true;
    }
    return diff <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
}

} // namespace

TEST_CASE("build_vocab ordering and reserved slots") {
    auto vocab = Vocabulary::build({seq_of({"a", "b", "a"})}, 1);
    CHECK(vocab.size() == 4);
    CHECK(vocab.token_at(0) == Vocabulary::kPadToken);
    CHECK(vocab.token_at(1) == Vocabulary::kUnkToken);
    CHECK(vocab.token_at(2) == "a"); // count 2
    CHECK(vocab.token_at(3) == "b"); // count 1
    CHECK(vocab.index_or_unk("a") == 2);
    CHECK(vocab.index_or_unk("zzz") == Vocabulary::kUnk);
    CHECK(vocab.count_at(2) == 2);

    auto filtered = Vocabulary::build({seq_of({"a", "b", "a"})}, 2);
    CHECK(filtered.size() == 3);
    CHECK(filtered.contains("a"));
    CHECK_FALSE(filtered.contains("b"));

    CHECK(error_code_of([&] { Vocabulary::build({seq_of({"a", "b", "a"})}, 3); }) ==
          "EmptyCorpusAfterFiltering");
}

TEST_CASE("build_vocab breaks count ties lexicographically") {
    auto vocab = Vocabulary::build({seq_of({"beta", "alpha", "beta", "alpha"})}, 1);
    CHECK(vocab.token_at(2) == "alpha");
    CHECK(vocab.token_at(3) == "beta");
}

TEST_CASE("count_cooccurrence matches the worked examples") {
    auto vocab = Vocabulary::build({seq_of({"a", "b", "a"})}, 1);
    const int a = vocab.index_or_unk("a"), b = vocab.index_or_unk("b");

    auto t1 = count_cooccurrence({seq_of({"a", "b", "a"})}, vocab, 1);
    CHECK(t1.lookup(a, b) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t1.lookup(a, a) == 0.0);

    auto t2 = count_cooccurrence({seq_of({"a", "b", "a"})}, vocab, 2);
    CHECK(t2.lookup(a, b) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t2.lookup(a, a) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK(count_cooccurrence({}, vocab, 5).empty());
}

TEST_CASE("count_cooccurrence equals the brute-force oracle on random corpora") {
    Rng rng(77);
    std::vector<std::string> alphabet;
    for (int i = 0; i < 12; ++i) {
        alphabet.push_back("w" + std::to_string(i));
    }
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<norm::TokenSeq> corpus;
        std::size_t total = 0;
        while (total < 100 + rng.next_below(900)) {
            std::vector<std::string> sent;
            std::size_t len = 1 + rng.next_below(20);
            for (std::size_t k = 0; k < len; ++k) {
                // occasionally an OOV token, which must not occupy a position
                if (rng.next_below(10) == 0) {
                    sent.push_back("oov");
                } else {
                    sent.push_back(alphabet[rng.next_below(alphabet.size())]);
                }
            }
            total += len;
            corpus.push_back(seq_of(sent));
        }
        std::vector<norm::TokenSeq> vocab_corpus;
        for (const auto& w : alphabet) {
            vocab_corpus.push_back(seq_of({w}));
        }
        auto vocab = Vocabulary::build(vocab_corpus, 1);
        int window = 1 + static_cast<int>(rng.next_below(8));

        auto got = count_cooccurrence(corpus, vocab, window);
        auto expected = oracle_cooccurrence(corpus, vocab, window);

        auto entries = got.sorted_entries();
        CHECK(entries.size() == expected.size());
        for (const auto& e : entries) {
            auto it = expected.find({e.i, e.j});
            REQUIRE(it != expected.end());
            CHECK(std::abs(e.weight - it->second) <= 1e-12);
            CHECK(got.lookup(e.j, e.i) == e.weight); // symmetry
        }
    }
}

TEST_CASE("cooccurrence merge is additive") {
    CooccurrenceTable a, b;
    a.add(2, 3, 1.0);
    b.add(3, 2, 0.5);
    b.add(4, 4, 2.0);
    a.merge(b);
    CHECK(a.lookup(2, 3) == 1.5);
    CHECK(a.lookup(4, 4) == 2.0);
}

TEST_CASE("glove gradients match central finite differences") {
    Rng rng(11);
    CooccurrenceTable table;
    table.add(0, 1, 3.0);
    table.add(1, 2, 0.5);
    table.add(2, 3, 7.0);
    table.add(0, 3, 1.25);
    table.add(2, 2, 2.0);

    GloveConfig cfg;
    cfg.dim = 6;
    cfg.x_max = 2.0; // puts some entries in the capped f(x)=1 regime
    GloveModel model = glove_init(4, cfg.dim, 123);
    // move away from the tiny init so gradients are not all near zero
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < cfg.dim; ++c) {
            model.w(r, c) += rng.uniform(-0.5, 0.5);
            model.wt(r, c) += rng.uniform(-0.5, 0.5);
        }
        model.b(r) += rng.uniform(-0.5, 0.5);
        model.bt(r) += rng.uniform(-0.5, 0.5);
    }

    GloveModel grads;
    glove_loss_and_grads(table, model, cfg, grads);

    const double h = 1e-5;
    auto fd_check = [&](double& slot, double analytic) {
        double saved = slot;
        slot = saved + h;
        double up = glove_loss(table, model, cfg);
        slot = saved - h;
        double down = glove_loss(table, model, cfg);
        slot = saved;
        CHECK(grad_close(analytic, (up - down) / (2.0 * h)));
    };
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < cfg.dim; ++c) {
            fd_check(model.w(r, c), grads.w(r, c));
            fd_check(model.wt(r, c), grads.wt(r, c));
        }
        fd_check(model.b(r), grads.b(r));
        fd_check(model.bt(r), grads.bt(r));
    }
}

TEST_CASE("glove fits the single-pair table to its exact optimum") {
    auto vocab = Vocabulary::build({seq_of({"a", "b"})}, 1);
    const int a = vocab.index_or_unk("a"), b = vocab.index_or_unk("b");
    CooccurrenceTable table;
    table.add(a, b, std::exp(1.0));

    GloveConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 600;
    cfg.seed = 3;
    TrainStats stats;
    GloveModel model;
    train_glove(table, vocab, cfg, &stats, &model);
    CHECK(stats.final_loss < stats.initial_loss);

    // The loss's unique attainable minimum is 0, at fitted score ln X = 1,
    // for both training directions.
    double fit_ab = model.w.row(a).dot(model.wt.row(b)) + model.b(a) + model.bt(b);
    double fit_ba = model.w.row(b).dot(model.wt.row(a)) + model.b(b) + model.bt(a);
    CHECK(fit_ab == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(fit_ba == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("glove training: epochs=0 returns the initialization") {
    auto vocab = Vocabulary::build({seq_of({"a", "b"})}, 1);
    CooccurrenceTable table;
    table.add(2, 3, 1.5);
    GloveConfig cfg;
    cfg.dim = 5;
    cfg.epochs = 0;
    cfg.seed = 9;
    EmbeddingMatrix emb = train_glove(table, vocab, cfg);
    GloveModel model = glove_init(vocab.size(), cfg.dim, cfg.seed);
    CHECK((emb.vectors - (model.w + model.wt)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("glove converges on a small corpus") {
    std::vector<norm::TokenSeq> corpus;
    for (int rep = 0; rep < 10; ++rep) {
        corpus.push_back(seq_of({"a", "b", "c"}));
        corpus.push_back(seq_of({"d", "e", "f"}));
        corpus.push_back(seq_of({"a", "c", "b"}));
        corpus.push_back(seq_of({"d", "f", "e"}));
    }
    auto vocab = Vocabulary::build(corpus, 1);
    auto table = count_cooccurrence(corpus, vocab, 5);

    GloveConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 60;
    cfg.seed = 4;
    TrainStats stats;
    train_glove(table, vocab, cfg, &stats);
    CHECK(stats.final_loss <= 0.1 * stats.initial_loss);
}

TEST_CASE("glove rejects an empty table") {
    auto vocab = Vocabulary::build({seq_of({"a"})}, 1);
    CooccurrenceTable table;
    GloveConfig cfg;
    CHECK(error_code_of([&] { train_glove(table, vocab, cfg); }) == "EmptyCooccurrenceTable");
}

TEST_CASE("sgns example gradients match central finite differences") {
    Rng rng(21);
    const int dim = 6;
    Eigen::VectorXd center(dim), context(dim);
    std::vector<Eigen::VectorXd> negatives(3, Eigen::VectorXd(dim));
    for (int i = 0; i < dim; ++i) {
        center(i) = rng.uniform(-1, 1);
        context(i) = rng.uniform(-1, 1);
        for (auto& n : negatives) {
            n(i) = rng.uniform(-1, 1);
        }
    }

    Eigen::VectorXd gc, gx;
    std::vector<Eigen::VectorXd> gn;
    sgns_example_loss_and_grads(center, context, negatives, gc, gx, gn);

    auto loss_of = [&]() {
        Eigen::VectorXd a, b;
        std::vector<Eigen::VectorXd> c;
        return sgns_example_loss_and_grads(center, context, negatives, a, b, c);
    };
    const double h = 1e-5;
    auto fd_check = [&](double& slot, double analytic) {
        double saved = slot;
        slot = saved + h;
        double up = loss_of();
        slot = saved - h;
        double down = loss_of();
        slot = saved;
        CHECK(grad_close(analytic, (up - down) / (2.0 * h)));
    };
    for (int i = 0; i < dim; ++i) {
        fd_check(center(i), gc(i));
        fd_check(context(i), gx(i));
        for (std::size_t k = 0; k < negatives.size(); ++k) {
            fd_check(negatives[k](i), gn[k](i));
        }
    }
}

TEST_CASE("sgns separates co-occurring tokens") {
    std::vector<norm::TokenSeq> corpus;
    for (int rep = 0; rep < 40; ++rep) {
        corpus.push_back(seq_of({"a", "b"}));
        corpus.push_back(seq_of({"c", "d"}));
    }
    auto vocab = Vocabulary::build(corpus, 1);
    SgnsConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 40;
    cfg.window = 2;
    cfg.seed = 6;
    cfg.subsample_threshold = 0.0; // tiny corpus, keep every token
    EmbeddingMatrix emb = train_sgns(corpus, vocab, cfg);

    auto cosine = [&](const std::string& x, const std::string& y) {
        Eigen::VectorXd vx = emb.vectors.row(emb.vocab.index_or_unk(x));
        Eigen::VectorXd vy = emb.vectors.row(emb.vocab.index_or_unk(y));
        return vx.dot(vy) / (vx.norm() * vy.norm());
    };
    CHECK(cosine("a", "b") > cosine("a", "c"));
    CHECK(cosine("c", "d") > cosine("c", "b"));
}

TEST_CASE("sgns: epochs=0 returns the initialization, deterministically") {
    std::vector<norm::TokenSeq> corpus{seq_of({"a", "b", "a", "b"})};
    auto vocab = Vocabulary::build(corpus, 1);
    SgnsConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 0;
    cfg.seed = 12;
    EmbeddingMatrix e1 = train_sgns(corpus, vocab, cfg);
    EmbeddingMatrix e2 = train_sgns(corpus, vocab, cfg);
    CHECK((e1.vectors - e2.vectors).cwiseAbs().maxCoeff() == 0.0);
    const double bound = 0.5 / cfg.dim;
    CHECK(e1.vectors.cwiseAbs().maxCoeff() <= bound);

    cfg.epochs = 3;
    EmbeddingMatrix trained = train_sgns(corpus, vocab, cfg);
    CHECK((trained.vectors - e1.vectors).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sgns: negatives may resample the positive on a tiny vocabulary") {
    std::vector<norm::TokenSeq> corpus{seq_of({"a", "b", "a", "b", "a", "b"})};
    auto vocab = Vocabulary::build(corpus, 1);
    SgnsConfig cfg;
    cfg.dim = 4;
    cfg.negatives = 1;
    cfg.epochs = 2;
    cfg.subsample_threshold = 0.0;
    CHECK_NOTHROW(train_sgns(corpus, vocab, cfg));
}

TEST_CASE("embedding save/load round trip") {
    TempDir tmp("embed");
    std::vector<norm::TokenSeq> corpus{seq_of({"alpha", "beta", "alpha"})};
    auto vocab = Vocabulary::build(corpus, 1);
    EmbeddingMatrix emb;
    emb.vocab = vocab;
    emb.dim = 3;
    emb.vectors.resize(vocab.size(), 3);
    Rng rng(8);
    for (int r = 0; r < vocab.size(); ++r) {
        for (int c = 0; c < 3; ++c) {
            emb.vectors(r, c) = rng.uniform(-2, 2);
        }
    }

    const std::string p1 = tmp.file("a.vec"), p2 = tmp.file("b.vec");
    save_embeddings(emb, p1);
    EmbeddingMatrix loaded = load_embeddings(p1);
    CHECK(loaded.dim == emb.dim);
    CHECK(loaded.vocab.size() == emb.vocab.size());
    for (int r = 0; r < vocab.size(); ++r) {
        CHECK(loaded.vocab.token_at(r) == emb.vocab.token_at(r));
    }
    CHECK((loaded.vectors - emb.vectors).cwiseAbs().maxCoeff() == 0.0);

    save_embeddings(loaded, p2);
    CHECK(read_file(p1) == read_file(p2));
}

TEST_CASE("embedding loader accepts third-party files without reserved rows") {
    TempDir tmp("embed");
    write_file(tmp.file("w2v.vec"), "2 3\nhello 1 2 3\nworld 4 5 6\n");
    EmbeddingMatrix emb = load_embeddings(tmp.file("w2v.vec"));
    CHECK(emb.vocab.size() == 4);
    CHECK(emb.vocab.token_at(0) == Vocabulary::kPadToken);
    CHECK(emb.vocab.token_at(2) == "hello");
    CHECK(emb.vectors.row(0).isZero());
    CHECK(emb.vectors(1, 0) == doctest::Approx(2.5)); // <unk> = mean
    CHECK(emb.vectors(2, 1) == 2.0);
}

TEST_CASE("embedding loader error paths") {
    TempDir tmp("embed");
    write_file(tmp.file("few.vec"), "2 100\n<pad> 1\n");
    CHECK(error_code_of([&] { load_embeddings(tmp.file("few.vec")); }) == "DimensionMismatch");

    std::string header_only = "2 2\na 1 2\n";
    write_file(tmp.file("count.vec"), header_only + "");
    CHECK(error_code_of([&] { load_embeddings(tmp.file("count.vec")); }) == "TokenCountMismatch");

    write_file(tmp.file("many.vec"), "1 2\na 1 2\nb 3 4\nc 5 6\n");
    CHECK(error_code_of([&] { load_embeddings(tmp.file("many.vec")); }) == "TokenCountMismatch");

    write_file(tmp.file("hdr.vec"), "two columns\na 1 2\n");
    CHECK(error_code_of([&] { load_embeddings(tmp.file("hdr.vec")); }) == "MalformedHeader");

    write_file(tmp.file("nan.vec"), "1 2\na 1 bad\n");
    CHECK(error_code_of([&] { load_embeddings(tmp.file("nan.vec")); }) == "DimensionMismatch");
}
