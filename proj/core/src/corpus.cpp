#include "codemix/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"

namespace codemix::corpus {

namespace {

std::string read_whole_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("FileNotFound", "cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// RFC-4180 record parser. Returns one record (list of fields) per call and
// advances `pos`. Quoted fields may contain commas, doubled quotes and
// newlines. Accepts LF and CRLF record terminators.
std::vector<std::string> next_csv_record(const std::string& text, std::size_t& pos, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;

    while (pos < text.size()) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                } else {
                    in_quotes = false;
                    ++pos;
                }
            } else {
                field.push_back(c);
                ++pos;
            }
            continue;
        }
        if (c == '"') {
            if (!field.empty()) {
                fail("MalformedCsv", "stray quote inside unquoted field at record " + std::to_string(line_no));
            }
            in_quotes = true;
            quoted_field = true;
            ++pos;
            continue;
        }
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            quoted_field = false;
            ++pos;
            continue;
        }
        if (c == '\n' || (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n')) {
            pos += (c == '\r') ? 2 : 1;
            fields.push_back(std::move(field));
            return fields;
        }
        if (quoted_field) {
            fail("MalformedCsv", "content after closing quote at record " + std::to_string(line_no));
        }
        field.push_back(c);
        ++pos;
    }
    if (in_quotes) {
        fail("MalformedCsv", "unterminated quoted field at record " + std::to_string(line_no));
    }
    fields.push_back(std::move(field));
    return fields;
}

struct CsvRow {
    std::string id;
    std::string text;
    std::string label;
    std::size_t record_no; // 1-based, header excluded
};

std::vector<CsvRow> read_dataset_csv(const std::string& path) {
    const std::string text = read_whole_file(path);
    std::size_t pos = 0;
    std::size_t record_no = 0;

    if (text.empty()) {
        fail("MalformedCsv", path + ": empty file, expected header id,text,label");
    }
    std::vector<std::string> header = next_csv_record(text, pos, record_no);
    if (header != std::vector<std::string>{"id", "text", "label"}) {
        fail("MalformedCsv", path + ": header must be exactly id,text,label");
    }

    std::vector<CsvRow> rows;
    while (pos < text.size()) {
        ++record_no;
        std::size_t start = pos;
        std::vector<std::string> fields = next_csv_record(text, pos, record_no);
        if (fields.size() == 1 && fields[0].empty() && pos >= text.size() && start + 1 >= text.size()) {
            break; // trailing newline after the last record
        }
        if (fields.size() != 3) {
            fail("MalformedCsv", path + ": record " + std::to_string(record_no) + " has " +
                                     std::to_string(fields.size()) + " fields, expected 3");
        }
        rows.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), record_no});
    }
    return rows;
}

void check_ids_and_text(const std::vector<CsvRow>& rows, bool allow_empty, const std::string& path) {
    std::unordered_set<std::string> seen;
    seen.reserve(rows.size());
    for (const CsvRow& row : rows) {
        if (row.id.empty()) {
            fail("DuplicateId", path + ": record " + std::to_string(row.record_no) + " has an empty id");
        }
        if (!seen.insert(row.id).second) {
            fail("DuplicateId", path + ": duplicate id '" + row.id + "' at record " + std::to_string(row.record_no));
        }
        if (row.text.empty() && !allow_empty) {
            fail("EmptyText", path + ": record " + std::to_string(row.record_no) + " (id '" + row.id +
                                 "') has empty text");
        }
    }
}

} // namespace

LabelMap::LabelMap(std::vector<std::pair<std::string, CanonicalLabel>> entries) {
    for (auto& [key, value] : entries) {
        if (!entries_.emplace(std::move(key), value).second) {
            fail("DuplicateKey", "duplicate label map entry");
        }
    }
}

LabelMap LabelMap::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("FileNotFound", "cannot open label map: " + path);
    }
    LabelMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            fail("MalformedLine", path + ":" + std::to_string(line_no) + ": expected dataset_label<TAB>canonical");
        }
        std::string key = line.substr(0, tab);
        std::string canonical = line.substr(tab + 1);
        auto label = label_from_name(canonical);
        if (!label) {
            fail("MalformedLine", path + ":" + std::to_string(line_no) + ": canonical label '" + canonical +
                                      "' is not one of benign, abusive, hate");
        }
        if (map.entries_.count(key)) {
            fail("DuplicateKey", path + ":" + std::to_string(line_no) + ": duplicate dataset label '" + key + "'");
        }
        map.entries_.emplace(std::move(key), *label);
    }
    return map;
}

bool LabelMap::contains(const std::string& dataset_label) const {
    return entries_.count(dataset_label) > 0;
}

CanonicalLabel LabelMap::at(const std::string& dataset_label) const {
    auto it = entries_.find(dataset_label);
    if (it == entries_.end()) {
        fail("UnknownLabel", "label '" + dataset_label + "' is not in the label map");
    }
    return it->second;
}

void SplitSpec::validate() const {
    if (train_fraction <= 0.0 || val_fraction <= 0.0 || test_fraction <= 0.0) {
        fail("InvalidSplitSpec", "split fractions must all be positive");
    }
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
        fail("InvalidSplitSpec", "split fractions must sum to 1");
    }
}

std::vector<LabeledText> load_dataset(const std::string& path, const LabelMap& label_map, bool allow_empty,
                                      const std::string& source_tag) {
    std::vector<CsvRow> rows = read_dataset_csv(path);
    check_ids_and_text(rows, allow_empty, path);

    std::vector<LabeledText> out;
    out.reserve(rows.size());
    for (CsvRow& row : rows) {
        if (!label_map.contains(row.label)) {
            fail("UnknownLabel", path + ": record " + std::to_string(row.record_no) + ": label '" + row.label +
                                     "' is not in the label map");
        }
        out.push_back({std::move(row.id), std::move(row.text), label_map.at(row.label), source_tag});
    }
    return out;
}

std::vector<LabeledText> load_texts(const std::string& path, bool allow_empty) {
    std::vector<CsvRow> rows = read_dataset_csv(path);
    check_ids_and_text(rows, allow_empty, path);

    std::vector<LabeledText> out;
    out.reserve(rows.size());
    for (CsvRow& row : rows) {
        out.push_back({std::move(row.id), std::move(row.text), std::nullopt, {}});
    }
    return out;
}

std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<double>& fractions) {
    std::vector<std::size_t> counts(fractions.size(), 0);
    std::vector<double> remainders(fractions.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        double exact = fractions[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    // Hand out the leftovers by descending remainder; ties go to the earlier
    // part (train before val before test).
    std::vector<std::size_t> order(fractions.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; assigned < total; ++k) {
        ++counts[order[k % order.size()]];
        ++assigned;
    }
    return counts;
}

namespace {

void append_sliced(Split& out, const std::vector<LabeledText>& data, const std::vector<std::size_t>& indices,
                   const std::vector<std::size_t>& counts) {
    std::size_t at = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(data[indices[at++]]);
    for (std::size_t i = 0; i < counts[1]; ++i) out.val.push_back(data[indices[at++]]);
    for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(data[indices[at++]]);
}

} // namespace

Split split(const std::vector<LabeledText>& data, const SplitSpec& spec) {
    spec.validate();
    if (data.empty()) {
        fail("TooFewSamples", "cannot split an empty dataset");
    }
    const std::vector<double> fractions{spec.train_fraction, spec.val_fraction, spec.test_fraction};
    Split out;

    if (!spec.stratified) {
        std::vector<std::size_t> indices(data.size());
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        Rng rng(derive_seed(spec.seed, {0}));
        rng.shuffle(indices);
        append_sliced(out, data, indices, largest_remainder(data.size(), fractions));
        return out;
    }

    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!data[i].label) {
            fail("UnlabeledSample", "stratified split requires labels; sample '" + data[i].id + "' has none");
        }
        by_class[static_cast<int>(*data[i].label)].push_back(i);
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (!by_class[c].empty() && by_class[c].size() < 3) {
            fail("TooFewSamples", std::string("class '") + label_name(static_cast<CanonicalLabel>(c)) +
                                      "' has only " + std::to_string(by_class[c].size()) +
                                      " samples; stratified splitting needs at least 3");
        }
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (by_class[c].empty()) {
            continue;
        }
        Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(c) + 1}));
        rng.shuffle(by_class[c]);
        append_sliced(out, data, by_class[c], largest_remainder(by_class[c].size(), fractions));
    }
    return out;
}

std::array<std::size_t, kNumClasses> class_distribution(const std::vector<LabeledText>& data) {
    std::array<std::size_t, kNumClasses> counts{};
    for (const LabeledText& sample : data) {
        if (!sample.label) {
            fail("UnlabeledSample", "sample '" + sample.id + "' has no label");
        }
        ++counts[static_cast<int>(*sample.label)];
    }
    return counts;
}

} // namespace codemix::corpus
