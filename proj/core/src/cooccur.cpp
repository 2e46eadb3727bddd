#include "codemix/embed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "codemix/error.hpp"

namespace codemix::embed {

namespace {

std::uint64_t pack(int i, int j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
}

} // namespace

void CooccurrenceTable::add(int i, int j, double weight) {
    if (i < 0 || j < 0) {
        fail("IndexOutOfVocab", "negative index in co-occurrence table");
    }
    if (weight <= 0.0) {
        fail("InvalidConfigValue", "co-occurrence weights must be positive");
    }
    if (i > j) {
        std::swap(i, j);
    }
    cells_[pack(i, j)] += weight;
}

double CooccurrenceTable::lookup(int i, int j) const {
    if (i > j) {
        std::swap(i, j);
    }
    auto it = cells_.find(pack(i, j));
    return it == cells_.end() ? 0.0 : it->second;
}

std::vector<CooccurrenceTable::Entry> CooccurrenceTable::sorted_entries() const {
    std::vector<Entry> out;
    out.reserve(cells_.size());
    for (const auto& [key, weight] : cells_) {
        out.push_back({static_cast<int>(key >> 32), static_cast<int>(key & 0xFFFFFFFFu), weight});
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return out;
}

void CooccurrenceTable::merge(const CooccurrenceTable& other) {
    for (const auto& [key, weight] : other.cells_) {
        cells_[key] += weight;
    }
}

void CooccurrenceTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail("FileNotFound", "cannot write co-occurrence dump: " + path);
    }
    char buf[64];
    for (const Entry& e : sorted_entries()) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), e.weight);
        out << e.i << ' ' << e.j << ' ' << std::string_view(buf, end - buf) << '\n';
    }
}

CooccurrenceTable count_cooccurrence(const std::vector<norm::TokenSeq>& corpus, const Vocabulary& vocab,
                                     int window) {
    if (window < 1) {
        fail("InvalidConfigValue", "window must be >= 1");
    }
    CooccurrenceTable table;
    std::vector<int> ids;
    for (const norm::TokenSeq& seq : corpus) {
        ids.clear();
        for (const std::string& tok : seq.tokens) {
            if (vocab.contains(tok)) {
                ids.push_back(vocab.index_or_unk(tok));
            }
        }
        for (std::size_t p = 0; p < ids.size(); ++p) {
            std::size_t hi = std::min(ids.size(), p + 1 + static_cast<std::size_t>(window));
            for (std::size_t q = p + 1; q < hi; ++q) {
                table.add(ids[p], ids[q], 1.0 / static_cast<double>(q - p));
            }
        }
    }
    return table;
}

} // namespace codemix::embed
