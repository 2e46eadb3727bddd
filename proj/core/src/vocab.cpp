#include "codemix/vocab.hpp"

#include <algorithm>

#include "codemix/error.hpp"

namespace codemix::embed {

Vocabulary::Vocabulary() {
    tokens_ = {kPadToken, kUnkToken};
    counts_ = {0, 0};
    index_ = {{kPadToken, kPad}, {kUnkToken, kUnk}};
}

Vocabulary Vocabulary::build_from_tokens(const std::vector<std::vector<std::string>>& corpus, int min_count) {
    if (min_count < 1) {
        fail("InvalidConfigValue", "min_count must be >= 1");
    }
    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& seq : corpus) {
        for (const auto& tok : seq) {
            ++counts[tok];
        }
    }
    std::vector<std::pair<std::string, std::int64_t>> kept;
    kept.reserve(counts.size());
    for (auto& [tok, n] : counts) {
        if (n >= min_count) {
            kept.emplace_back(tok, n);
        }
    }
    if (kept.empty()) {
        fail("EmptyCorpusAfterFiltering",
             "no token appears at least " + std::to_string(min_count) + " times");
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.tokens_.reserve(kept.size() + 2);
    for (auto& [tok, n] : kept) {
        vocab.index_.emplace(tok, static_cast<int>(vocab.tokens_.size()));
        vocab.tokens_.push_back(std::move(tok));
        vocab.counts_.push_back(n);
    }
    return vocab;
}

Vocabulary Vocabulary::build(const std::vector<norm::TokenSeq>& corpus, int min_count) {
    std::vector<std::vector<std::string>> plain;
    plain.reserve(corpus.size());
    for (const auto& seq : corpus) {
        plain.push_back(seq.tokens);
    }
    return build_from_tokens(plain, min_count);
}

Vocabulary Vocabulary::from_ordered_tokens(const std::vector<std::string>& tokens) {
    if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
        fail("MalformedHeader", "ordered token list must start with the reserved tokens");
    }
    Vocabulary vocab;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        if (!vocab.index_.emplace(tokens[i], static_cast<int>(i)).second) {
            fail("DuplicateKey", "duplicate token '" + tokens[i] + "'");
        }
        vocab.tokens_.push_back(tokens[i]);
        vocab.counts_.push_back(0);
    }
    return vocab;
}

int Vocabulary::index_or_unk(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return index_.count(token) > 0;
}

const std::string& Vocabulary::token_at(int index) const {
    return tokens_.at(static_cast<std::size_t>(index));
}

std::int64_t Vocabulary::count_at(int index) const {
    return counts_.at(static_cast<std::size_t>(index));
}

} // namespace codemix::embed
