#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "codemix/corpus.hpp"
#include "codemix/rng.hpp"
#include "test_util.hpp"

using namespace codemix;
using namespace codemix::corpus;
using testutil::TempDir;
using testutil::error_code_of;
using testutil::write_file;

namespace {

LabelMap heot_map() {
    return LabelMap({{"hate", CanonicalLabel::HateInducing},
                     {"abusive", CanonicalLabel::Abusive},
                     {"benign", CanonicalLabel::Benign}});
}

std::vector<LabeledText> make_samples(const std::vector<CanonicalLabel>& labels) {
    std::vector<LabeledText> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.push_back({"id" + std::to_string(i), "text " + std::to_string(i), labels[i], "test"});
    }
    return out;
}

} // namespace

TEST_CASE("load_dataset maps labels and preserves rows") {
    TempDir tmp("corpus");
    write_file(tmp.file("d.csv"), "id,text,label\nt1,\"Bik gya Porkistan\",hate\n");
    auto data = load_dataset(tmp.file("d.csv"), heot_map());
    REQUIRE(data.size() == 1);
    CHECK(data[0].id == "t1");
    CHECK(data[0].raw_text == "Bik gya Porkistan");
    CHECK(data[0].label == CanonicalLabel::HateInducing);
}

TEST_CASE("load_dataset handles quoting, commas and embedded newlines") {
    TempDir tmp("corpus");
    write_file(tmp.file("d.csv"),
               "id,text,label\n"
               "a,\"hello, \"\"world\"\"\",benign\n"
               "b,\"line one\nline two\",abusive\n"
               "c,plain,hate\n");
    auto data = load_dataset(tmp.file("d.csv"), heot_map());
    REQUIRE(data.size() == 3);
    CHECK(data[0].raw_text == "hello, \"world\"");
    CHECK(data[1].raw_text == "line one\nline two");
    CHECK(data[2].raw_text == "plain");
}

TEST_CASE("load_dataset: header-only file gives an empty list") {
    TempDir tmp("corpus");
    write_file(tmp.file("d.csv"), "id,text,label\n");
    CHECK(load_dataset(tmp.file("d.csv"), heot_map()).empty());
}

TEST_CASE("load_dataset error paths") {
    TempDir tmp("corpus");
    LabelMap map = heot_map();

    write_file(tmp.file("unknown.csv"), "id,text,label\nt1,x,spam\n");
    CHECK(error_code_of([&] { load_dataset(tmp.file("unknown.csv"), map); }) == "UnknownLabel");

    write_file(tmp.file("dup.csv"), "id,text,label\nt1,x,hate\nt1,y,hate\n");
    CHECK(error_code_of([&] { load_dataset(tmp.file("dup.csv"), map); }) == "DuplicateId");

    write_file(tmp.file("empty_text.csv"), "id,text,label\nt1,,hate\n");
    CHECK(error_code_of([&] { load_dataset(tmp.file("empty_text.csv"), map); }) == "EmptyText");
    CHECK(load_dataset(tmp.file("empty_text.csv"), map, /*allow_empty=*/true).size() == 1);

    write_file(tmp.file("arity.csv"), "id,text,label\nt1,x\n");
    CHECK(error_code_of([&] { load_dataset(tmp.file("arity.csv"), map); }) == "MalformedCsv");

    write_file(tmp.file("quote.csv"), "id,text,label\nt1,\"abc,hate\n");
    CHECK(error_code_of([&] { load_dataset(tmp.file("quote.csv"), map); }) == "MalformedCsv");

    write_file(tmp.file("header.csv"), "id,label,text\nt1,hate,x\n");
    CHECK(error_code_of([&] { load_dataset(tmp.file("header.csv"), map); }) == "MalformedCsv");

    CHECK(error_code_of([&] { load_dataset(tmp.file("missing.csv"), map); }) == "FileNotFound");
}

TEST_CASE("duplicate text under distinct ids is allowed") {
    TempDir tmp("corpus");
    write_file(tmp.file("d.csv"), "id,text,label\na,same text,hate\nb,same text,hate\n");
    CHECK(load_dataset(tmp.file("d.csv"), heot_map()).size() == 2);
}

TEST_CASE("label map files parse comments and reject junk") {
    TempDir tmp("labelmap");
    write_file(tmp.file("ok.tsv"), "# comment\nhate\thate\n0\tbenign\n");
    LabelMap map = LabelMap::from_file(tmp.file("ok.tsv"));
    CHECK(map.at("hate") == CanonicalLabel::HateInducing);
    CHECK(map.at("0") == CanonicalLabel::Benign);
    CHECK_FALSE(map.contains("1"));

    write_file(tmp.file("bad.tsv"), "hate\toffensive\n");
    CHECK(error_code_of([&] { LabelMap::from_file(tmp.file("bad.tsv")); }) == "MalformedLine");

    write_file(tmp.file("dup.tsv"), "x\thate\nx\tbenign\n");
    CHECK(error_code_of([&] { LabelMap::from_file(tmp.file("dup.tsv")); }) == "DuplicateKey");

    write_file(tmp.file("notab.tsv"), "plainline\n");
    CHECK(error_code_of([&] { LabelMap::from_file(tmp.file("notab.tsv")); }) == "MalformedLine");
}

TEST_CASE("largest remainder: 10 samples at (0.8, 0.1, 0.1) gives (8, 1, 1)") {
    auto counts = largest_remainder(10, {0.8, 0.1, 0.1});
    CHECK(counts == std::vector<std::size_t>{8, 1, 1});
}

TEST_CASE("largest remainder ties go to the earlier part") {
    // 3 at (2/3, 1/6, 1/6): floors (1,0,0), remainders ~(1.0, 0.5, 0.5).
    auto counts = largest_remainder(3, {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0});
    CHECK(counts == std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("unstratified split sizes and determinism") {
    auto data = make_samples(std::vector<CanonicalLabel>(10, CanonicalLabel::Benign));
    SplitSpec spec;
    spec.stratified = false;
    spec.seed = 42;
    Split a = split(data, spec);
    CHECK(a.train.size() == 8);
    CHECK(a.val.size() == 1);
    CHECK(a.test.size() == 1);

    Split b = split(data, spec);
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].id == b.train[i].id);
    }
    CHECK(a.val[0].id == b.val[0].id);
    CHECK(a.test[0].id == b.test[0].id);
}

TEST_CASE("stratified split: 9 samples (3,3,3) at (2/3,1/6,1/6) puts 2 of each class in train") {
    std::vector<CanonicalLabel> labels;
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < 3; ++k) {
            labels.push_back(static_cast<CanonicalLabel>(c));
        }
    }
    auto data = make_samples(labels);
    SplitSpec spec;
    spec.train_fraction = 2.0 / 3.0;
    spec.val_fraction = 1.0 / 6.0;
    spec.test_fraction = 1.0 / 6.0;
    spec.stratified = true;
    spec.seed = 7;
    Split s = split(data, spec);
    auto dist = class_distribution(s.train);
    CHECK(dist[0] == 2);
    CHECK(dist[1] == 2);
    CHECK(dist[2] == 2);
}

TEST_CASE("split partition and stratification bound properties") {
    Rng rng(1234);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<CanonicalLabel> labels;
        std::size_t n = 9 + rng.next_below(120);
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back(static_cast<CanonicalLabel>(rng.next_below(3)));
        }
        // stratification needs >= 3 per present class
        for (int c = 0; c < 3; ++c) {
            for (int k = 0; k < 3; ++k) {
                labels.push_back(static_cast<CanonicalLabel>(c));
            }
        }
        auto data = make_samples(labels);
        SplitSpec spec;
        spec.stratified = (trial % 2 == 0);
        spec.seed = static_cast<std::uint64_t>(trial);
        Split s = split(data, spec);

        // Partition: disjoint by id, covering as multisets.
        std::set<std::string> ids;
        std::size_t total = 0;
        for (const auto* part : {&s.train, &s.val, &s.test}) {
            for (const auto& sample : *part) {
                CHECK(ids.insert(sample.id).second);
                ++total;
            }
        }
        CHECK(total == data.size());

        if (spec.stratified) {
            auto whole = class_distribution(data);
            const std::vector<double> fr{spec.train_fraction, spec.val_fraction, spec.test_fraction};
            std::array<std::array<std::size_t, 3>, 3> got{
                class_distribution(s.train), class_distribution(s.val), class_distribution(s.test)};
            for (int part = 0; part < 3; ++part) {
                for (int c = 0; c < 3; ++c) {
                    double exact = fr[part] * static_cast<double>(whole[c]);
                    CHECK(std::abs(static_cast<double>(got[part][c]) - exact) < 1.0);
                }
            }
        }
    }
}

TEST_CASE("split error paths") {
    SplitSpec spec;
    CHECK(error_code_of([&] { split({}, spec); }) == "TooFewSamples");

    // a class with fewer than 3 members cannot be stratified
    auto data = make_samples({CanonicalLabel::Benign, CanonicalLabel::Benign, CanonicalLabel::Benign,
                              CanonicalLabel::Abusive});
    CHECK(error_code_of([&] { split(data, spec); }) == "TooFewSamples");

    SplitSpec bad;
    bad.train_fraction = 0.5;
    bad.val_fraction = 0.2;
    bad.test_fraction = 0.2;
    CHECK(error_code_of([&] { split(data, bad); }) == "InvalidSplitSpec");

    auto unlabeled = make_samples({CanonicalLabel::Benign});
    unlabeled[0].label.reset();
    SplitSpec strat;
    CHECK(error_code_of([&] { split(unlabeled, strat); }) == "UnlabeledSample");
}

TEST_CASE("class_distribution") {
    CHECK(class_distribution({}) == std::array<std::size_t, 3>{0, 0, 0});

    // the three dataset examples: one per category
    auto table2 = make_samples({CanonicalLabel::Benign, CanonicalLabel::HateInducing, CanonicalLabel::Abusive});
    CHECK(class_distribution(table2) == std::array<std::size_t, 3>{1, 1, 1});

    auto skewed = make_samples({CanonicalLabel::Benign, CanonicalLabel::Benign, CanonicalLabel::Benign,
                                CanonicalLabel::Benign, CanonicalLabel::Abusive});
    CHECK(class_distribution(skewed) == std::array<std::size_t, 3>{4, 1, 0});

    auto unlabeled = make_samples({CanonicalLabel::Benign});
    unlabeled[0].label.reset();
    CHECK(error_code_of([&] { class_distribution(unlabeled); }) == "UnlabeledSample");
}

TEST_CASE("load_texts ignores the label column") {
    TempDir tmp("corpus");
    write_file(tmp.file("d.csv"), "id,text,label\nt1,hello,\nt2,world,whatever\n");
    auto data = load_texts(tmp.file("d.csv"));
    REQUIRE(data.size() == 2);
    CHECK_FALSE(data[0].label.has_value());
    CHECK_FALSE(data[1].label.has_value());
}
