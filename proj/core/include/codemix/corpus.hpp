#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "codemix/label.hpp"

namespace codemix::corpus {

// One raw sample. `source` is a free dataset tag ("source", "target", ...).
struct LabeledText {
    std::string id;
    std::string raw_text;
    std::optional<CanonicalLabel> label;
    std::string source;
};

// Total mapping from dataset-specific label strings to canonical labels.
// Loading a dataset fails on any label string not present here.
class LabelMap {
public:
    LabelMap() = default;
    explicit LabelMap(std::vector<std::pair<std::string, CanonicalLabel>> entries);

    // File format: `dataset_label<TAB>canonical` per line, canonical in
    // {benign, abusive, hate}; lines starting with '#' are comments.
    static LabelMap from_file(const std::string& path);

    bool contains(const std::string& dataset_label) const;
    CanonicalLabel at(const std::string& dataset_label) const; // throws UnknownLabel
    std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, CanonicalLabel> entries_;
};

struct SplitSpec {
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;
    bool stratified = true;
    std::uint64_t seed = 1;

    void validate() const; // fractions positive, sum to 1 within 1e-9
};

struct Split {
    std::vector<LabeledText> train;
    std::vector<LabeledText> val;
    std::vector<LabeledText> test;
};

// Reads a dataset CSV (header exactly `id,text,label`, RFC-4180 quoting).
// Every row yields one sample with a canonical label; rows are never
// silently dropped.
std::vector<LabeledText> load_dataset(const std::string& path, const LabelMap& label_map,
                                      bool allow_empty = false, const std::string& source_tag = {});

// Same CSV shape but the label column is ignored (classification input).
std::vector<LabeledText> load_texts(const std::string& path, bool allow_empty = false);

// Deterministic partition. Sizes follow largest-remainder rounding (ties go
// to the earlier split), applied per class when stratified.
Split split(const std::vector<LabeledText>& data, const SplitSpec& spec);

// Counts per canonical label, indexed by label code. All samples must carry
// a label.
std::array<std::size_t, kNumClasses> class_distribution(const std::vector<LabeledText>& data);

// Largest-remainder apportionment of `total` into parts proportional to
// `fractions`; exposed because the split tests pin its convention.
std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<double>& fractions);

} // namespace codemix::corpus
