#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace codemix::norm {

enum class LexiconKind {
    Transliteration, // spelling variants -> canonical romanized form
    Translation,     // romanized Hindi -> English
    Profanity,       // profane forms (often masked with '*') -> English
    Stopword,        // function words, mapped to nothing
    Variant,         // ad-hoc rewrites (SMS-isms etc.)
};

const char* lexicon_kind_name(LexiconKind kind);
std::optional<LexiconKind> lexicon_kind_from_name(std::string_view name);

// Ordered token -> replacement-sequence mapping. Keys are lowercased and
// whitespace-free; stopword entries map to the empty sequence, everything
// else to at least one token.
class Lexicon {
public:
    explicit Lexicon(LexiconKind kind) : kind_(kind) {}

    // TSV file: `source<TAB>target` per line, target split on spaces; empty
    // target only for stopword files; '#' starts a comment line.
    static Lexicon from_file(const std::string& path, LexiconKind kind);

    void add(const std::string& key, std::vector<std::string> target);

    // nullptr when the token is not a key.
    const std::vector<std::string>* find(const std::string& token) const;

    LexiconKind kind() const { return kind_; }
    std::size_t size() const { return keys_.size(); }
    const std::vector<std::string>& keys() const { return keys_; } // file order

private:
    LexiconKind kind_;
    std::vector<std::string> keys_;
    std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// Where each output token came from.
enum class TokenTag {
    Passed,
    Transliterated,
    Translated,
    ProfanityMapped,
    VariantResolved,
    Unknown,
};

const char* token_tag_name(TokenTag tag);

struct TokenSeq {
    std::vector<std::string> tokens;
    std::vector<TokenTag> tags; // same length as tokens

    std::size_t size() const { return tokens.size(); }
};

struct NormalizerConfig {
    bool remove_urls = true;
    bool remove_numbers = true;
    bool remove_punctuation = true;
    bool remove_emoticons = true;
    bool remove_stopwords = true;
    int variant_max_edit_distance = 1;
    bool variant_fallback_enabled = false;
    // Stage order over the supplied lexicons. Empty means "canonical order,
    // restricted to the kinds actually supplied"; a non-empty list must only
    // name supplied kinds.
    std::vector<LexiconKind> lexicon_order;
};

// The canonical stage order: stopword, profanity, transliteration,
// translation, variant.
const std::vector<LexiconKind>& canonical_lexicon_order();

// Lowercases, strips URLs / emoticons / punctuation / standalone numbers per
// flags, collapses whitespace. Idempotent. Throws InvalidUtf8 on bad input.
std::string clean(std::string_view raw_text, const NormalizerConfig& cfg);

// Whitespace split; every token tagged Passed.
TokenSeq tokenize(std::string_view cleaned);

// Runs the token stream through the lexicon stages in order. Stopword hits
// delete the token, other hits splice the target tokens in place; tokens
// that never hit are tagged Unknown (or resolved fuzzily when variant
// fallback is enabled).
TokenSeq apply_lexicons(const TokenSeq& seq, const std::vector<Lexicon>& lexicons, const NormalizerConfig& cfg);

struct VariantMatch {
    std::string key;
    int distance;
};

// Closest lexicon key by Levenshtein distance, if any key is within
// max_edit_distance. Ties break to the shorter key, then lexicographically.
std::optional<VariantMatch> resolve_variant(const std::string& token, const Lexicon& lexicon,
                                            int max_edit_distance);

// clean -> tokenize -> apply_lexicons.
TokenSeq normalize(std::string_view raw_text, const std::vector<Lexicon>& lexicons, const NormalizerConfig& cfg);

// Unit-cost edit distance on bytes.
int levenshtein(std::string_view a, std::string_view b);

} // namespace codemix::norm
