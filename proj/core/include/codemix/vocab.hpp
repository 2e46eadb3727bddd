#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "codemix/normalize.hpp"

namespace codemix::embed {

// Dense token index with two reserved slots. Non-reserved tokens are ordered
// by descending corpus count, ties broken lexicographically.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr const char* kPadToken = "<pad>";
    static constexpr const char* kUnkToken = "<unk>";

    Vocabulary();

    static Vocabulary build(const std::vector<norm::TokenSeq>& corpus, int min_count);
    static Vocabulary build_from_tokens(const std::vector<std::vector<std::string>>& corpus, int min_count);

    // Reconstructs a vocabulary from an explicit ordered token list whose
    // first two entries must be the reserved tokens. Counts are unknown and
    // recorded as zero.
    static Vocabulary from_ordered_tokens(const std::vector<std::string>& tokens);

    // Index of `token`, or kUnk when absent.
    int index_or_unk(const std::string& token) const;
    bool contains(const std::string& token) const;
    const std::string& token_at(int index) const;
    std::int64_t count_at(int index) const;
    int size() const { return static_cast<int>(tokens_.size()); }

private:
    std::vector<std::string> tokens_;
    std::vector<std::int64_t> counts_;
    std::unordered_map<std::string, int> index_;
};

} // namespace codemix::embed
