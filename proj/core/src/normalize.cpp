#include "codemix/normalize.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <unordered_set>
#include <utility>

#include "codemix/error.hpp"

namespace codemix::norm {

namespace {

// ---------------------------------------------------------------------------
// UTF-8
// ---------------------------------------------------------------------------

// Strict decoder: rejects overlong encodings, surrogates and out-of-range
// codepoints.
std::vector<char32_t> decode_utf8(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char b0 = static_cast<unsigned char>(text[i]);
        char32_t cp = 0;
        std::size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            fail("InvalidUtf8", "invalid UTF-8 lead byte at offset " + std::to_string(i));
        }
        if (i + len > text.size()) {
            fail("InvalidUtf8", "truncated UTF-8 sequence at offset " + std::to_string(i));
        }
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) {
                fail("InvalidUtf8", "invalid UTF-8 continuation byte at offset " + std::to_string(i + k));
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMin[len]) {
            fail("InvalidUtf8", "overlong UTF-8 encoding at offset " + std::to_string(i));
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            fail("InvalidUtf8", "invalid codepoint at offset " + std::to_string(i));
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

bool is_ascii_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\v' || cp == U'\f';
}

bool is_kept_char(char32_t cp) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'0' && cp <= U'9') || cp == U'\'' || cp == U'*';
}

// Emoji and pictograph blocks, plus variation selectors, ZWJ and the
// combining keycap.
bool is_emoji_codepoint(char32_t cp) {
    static constexpr std::pair<char32_t, char32_t> kRanges[] = {
        {0x1F000, 0x1F0FF}, // mahjong, dominoes, playing cards
        {0x1F1E6, 0x1F1FF}, // regional indicators
        {0x1F300, 0x1F5FF}, // misc symbols and pictographs
        {0x1F600, 0x1F64F}, // emoticons
        {0x1F680, 0x1F6FF}, // transport
        {0x1F900, 0x1F9FF}, // supplemental symbols
        {0x1FA70, 0x1FAFF}, // symbols and pictographs extended-A
        {0x2600, 0x26FF},   // misc symbols
        {0x2700, 0x27BF},   // dingbats
        {0x2B00, 0x2BFF},   // misc symbols and arrows
        {0xFE00, 0xFE0F},   // variation selectors
        {0x200D, 0x200D},   // zero width joiner
        {0x20E3, 0x20E3},   // combining enclosing keycap
    };
    for (auto [lo, hi] : kRanges) {
        if (cp >= lo && cp <= hi) {
            return true;
        }
    }
    return false;
}

const std::unordered_set<std::u32string>& ascii_emoticons() {
    // Matched as standalone lowercased tokens.
    static const std::unordered_set<std::u32string> kSet = {
        U":)",  U":-)", U":(",  U":-(", U":d",  U":-d", U";)",  U";-)", U":p",  U":-p", U":/",
        U":-/", U":\\", U":o",  U":-o", U"xd",  U"xdd", U":|",  U":-|", U"<3",  U"</3", U":*",
        U":-*", U"^^",  U"^_^", U"-_-", U"o.o", U"o_o", U"t_t", U":'(", U"=)",  U"=(",  U":3",
        U">:(", U":s",  U":x",  U":c",  U"c:",  U";p",  U";d",
    };
    return kSet;
}

using TokenPred = bool (*)(const std::u32string&);

std::vector<std::u32string> split_ws(const std::vector<char32_t>& cps) {
    std::vector<std::u32string> tokens;
    std::u32string cur;
    for (char32_t cp : cps) {
        if (is_ascii_space(cp)) {
            if (!cur.empty()) {
                tokens.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(cp);
        }
    }
    if (!cur.empty()) {
        tokens.push_back(std::move(cur));
    }
    return tokens;
}

std::vector<char32_t> join_ws(const std::vector<std::u32string>& tokens) {
    std::vector<char32_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out.push_back(U' ');
        }
        out.insert(out.end(), tokens[i].begin(), tokens[i].end());
    }
    return out;
}

void drop_tokens_if(std::vector<char32_t>& cps, TokenPred pred) {
    std::vector<std::u32string> tokens = split_ws(cps);
    std::vector<std::u32string> kept;
    kept.reserve(tokens.size());
    for (auto& tok : tokens) {
        if (!pred(tok)) {
            kept.push_back(std::move(tok));
        }
    }
    cps = join_ws(kept);
}

bool starts_with(const std::u32string& tok, std::u32string_view prefix) {
    return tok.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), tok.begin());
}

bool is_url_token(const std::u32string& tok) {
    return starts_with(tok, U"http://") || starts_with(tok, U"https://") || starts_with(tok, U"ftp://") ||
           starts_with(tok, U"www.");
}

bool is_ascii_emoticon_token(const std::u32string& tok) {
    return ascii_emoticons().count(tok) > 0;
}

bool is_number_token(const std::u32string& tok) {
    if (tok.empty()) {
        return false;
    }
    for (char32_t cp : tok) {
        if (cp < U'0' || cp > U'9') {
            return false;
        }
    }
    return true;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

const char* lexicon_kind_name(LexiconKind kind) {
    switch (kind) {
    case LexiconKind::Transliteration: return "transliteration";
    case LexiconKind::Translation: return "translation";
    case LexiconKind::Profanity: return "profanity";
    case LexiconKind::Stopword: return "stopword";
    case LexiconKind::Variant: return "variant";
    }
    return "?";
}

std::optional<LexiconKind> lexicon_kind_from_name(std::string_view name) {
    if (name == "transliteration") return LexiconKind::Transliteration;
    if (name == "translation") return LexiconKind::Translation;
    if (name == "profanity") return LexiconKind::Profanity;
    if (name == "stopword") return LexiconKind::Stopword;
    if (name == "variant") return LexiconKind::Variant;
    return std::nullopt;
}

const char* token_tag_name(TokenTag tag) {
    switch (tag) {
    case TokenTag::Passed: return "passed";
    case TokenTag::Transliterated: return "transliterated";
    case TokenTag::Translated: return "translated";
    case TokenTag::ProfanityMapped: return "profanity";
    case TokenTag::VariantResolved: return "variant";
    case TokenTag::Unknown: return "unknown";
    }
    return "?";
}

void Lexicon::add(const std::string& key, std::vector<std::string> target) {
    std::string lowered = lower_ascii(key);
    if (lowered.empty()) {
        fail("MalformedLine", "lexicon key must be non-empty");
    }
    if (lowered.find_first_of(" \t") != std::string::npos) {
        fail("MalformedLine", "lexicon key '" + lowered + "' contains whitespace");
    }
    if (kind_ == LexiconKind::Stopword) {
        if (!target.empty()) {
            fail("MalformedLine", "stopword entry '" + lowered + "' must have an empty target");
        }
    } else if (target.empty()) {
        fail("EmptyTargetForNonStopword", "entry '" + lowered + "' has an empty target");
    }
    if (entries_.count(lowered)) {
        fail("DuplicateKey", "duplicate lexicon key '" + lowered + "'");
    }
    keys_.push_back(lowered);
    entries_.emplace(std::move(lowered), std::move(target));
}

const std::vector<std::string>* Lexicon::find(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
}

Lexicon Lexicon::from_file(const std::string& path, LexiconKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("FileNotFound", "cannot open lexicon: " + path);
    }
    Lexicon lex(kind);
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
        const std::string where = path + ":" + std::to_string(line_no);
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            fail("MalformedLine", where + ": expected source<TAB>target");
        }
        std::string key = line.substr(0, tab);
        std::string target_text = lower_ascii(line.substr(tab + 1));

        std::vector<std::string> target;
        std::size_t pos = 0;
        while (pos < target_text.size()) {
            std::size_t space = target_text.find(' ', pos);
            std::string tok = target_text.substr(pos, space == std::string::npos ? space : space - pos);
            if (!tok.empty()) {
                // Targets become output tokens, so they must respect the
                // output alphabet.
                for (char c : tok) {
                    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'' || c == '*';
                    if (!ok) {
                        fail("MalformedLine", where + ": target token '" + tok + "' has characters outside [a-z0-9'*]");
                    }
                }
                target.push_back(std::move(tok));
            }
            if (space == std::string::npos) {
                break;
            }
            pos = space + 1;
        }
        try {
            lex.add(key, std::move(target));
        } catch (const Error& e) {
            fail(e.code(), where + ": " + e.what());
        }
    }
    return lex;
}

// ---------------------------------------------------------------------------
// clean / tokenize
// ---------------------------------------------------------------------------

std::string clean(std::string_view raw_text, const NormalizerConfig& cfg) {
    std::vector<char32_t> cps = decode_utf8(raw_text);

    for (char32_t& cp : cps) {
        if (cp >= U'A' && cp <= U'Z') {
            cp = cp - U'A' + U'a';
        }
    }
    if (cfg.remove_urls) {
        drop_tokens_if(cps, is_url_token);
    }
    if (cfg.remove_emoticons) {
        for (char32_t& cp : cps) {
            if (is_emoji_codepoint(cp)) {
                cp = U' ';
            }
        }
        drop_tokens_if(cps, is_ascii_emoticon_token);
    }
    if (cfg.remove_punctuation) {
        for (char32_t& cp : cps) {
            if (!is_kept_char(cp) && !is_ascii_space(cp)) {
                cp = U' ';
            }
        }
    }
    if (cfg.remove_numbers) {
        drop_tokens_if(cps, is_number_token);
    }
    // Collapse whitespace runs and trim.
    cps = join_ws(split_ws(cps));
    return encode_utf8(cps);
}

TokenSeq tokenize(std::string_view cleaned) {
    TokenSeq seq;
    std::size_t pos = 0;
    while (pos < cleaned.size()) {
        while (pos < cleaned.size() && is_ascii_space(static_cast<unsigned char>(cleaned[pos]))) {
            ++pos;
        }
        std::size_t start = pos;
        while (pos < cleaned.size() && !is_ascii_space(static_cast<unsigned char>(cleaned[pos]))) {
            ++pos;
        }
        if (pos > start) {
            seq.tokens.emplace_back(cleaned.substr(start, pos - start));
            seq.tags.push_back(TokenTag::Passed);
        }
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Lexicon application
// ---------------------------------------------------------------------------

const std::vector<LexiconKind>& canonical_lexicon_order() {
    static const std::vector<LexiconKind> kOrder = {
        LexiconKind::Stopword, LexiconKind::Profanity, LexiconKind::Transliteration,
        LexiconKind::Translation, LexiconKind::Variant,
    };
    return kOrder;
}

int levenshtein(std::string_view a, std::string_view b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return static_cast<int>(m);
    if (m == 0) return static_cast<int>(n);
    std::vector<int> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        prev[j] = static_cast<int>(j);
    }
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::optional<VariantMatch> resolve_variant(const std::string& token, const Lexicon& lexicon,
                                            int max_edit_distance) {
    if (max_edit_distance < 1) {
        return std::nullopt;
    }
    std::optional<VariantMatch> best;
    for (const std::string& key : lexicon.keys()) {
        std::size_t len_a = token.size(), len_b = key.size();
        std::size_t diff = len_a > len_b ? len_a - len_b : len_b - len_a;
        if (diff > static_cast<std::size_t>(max_edit_distance)) {
            continue;
        }
        int d = levenshtein(token, key);
        if (d > max_edit_distance) {
            continue;
        }
        if (!best || d < best->distance ||
            (d == best->distance &&
             (key.size() < best->key.size() || (key.size() == best->key.size() && key < best->key)))) {
            best = VariantMatch{key, d};
        }
    }
    return best;
}

namespace {

TokenTag tag_for_kind(LexiconKind kind) {
    switch (kind) {
    case LexiconKind::Transliteration: return TokenTag::Transliterated;
    case LexiconKind::Translation: return TokenTag::Translated;
    case LexiconKind::Profanity: return TokenTag::ProfanityMapped;
    case LexiconKind::Variant: return TokenTag::VariantResolved;
    case LexiconKind::Stopword: break;
    }
    return TokenTag::Passed;
}

struct WorkToken {
    std::string text;
    TokenTag tag = TokenTag::Passed;
    bool hit = false;
};

} // namespace

TokenSeq apply_lexicons(const TokenSeq& seq, const std::vector<Lexicon>& lexicons, const NormalizerConfig& cfg) {
    std::array<const Lexicon*, 5> by_kind{};
    for (const Lexicon& lex : lexicons) {
        const Lexicon*& slot = by_kind[static_cast<int>(lex.kind())];
        if (slot != nullptr) {
            fail("DuplicateLexiconKind",
                 std::string("two lexicons of kind '") + lexicon_kind_name(lex.kind()) + "' supplied");
        }
        slot = &lex;
    }

    std::vector<LexiconKind> order;
    if (cfg.lexicon_order.empty()) {
        for (LexiconKind kind : canonical_lexicon_order()) {
            if (by_kind[static_cast<int>(kind)] != nullptr) {
                order.push_back(kind);
            }
        }
    } else {
        for (LexiconKind kind : cfg.lexicon_order) {
            if (by_kind[static_cast<int>(kind)] == nullptr) {
                fail("MissingLexiconKind",
                     std::string("lexicon order names kind '") + lexicon_kind_name(kind) + "' but none was supplied");
            }
            if (std::count(order.begin(), order.end(), kind) > 0) {
                fail("DuplicateLexiconKind",
                     std::string("lexicon order lists kind '") + lexicon_kind_name(kind) + "' twice");
            }
            order.push_back(kind);
        }
    }
    if (!cfg.remove_stopwords) {
        std::erase(order, LexiconKind::Stopword);
    }

    std::vector<WorkToken> work;
    work.reserve(seq.tokens.size());
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        work.push_back({seq.tokens[i], seq.tags[i], false});
    }

    // Exact stages. A hit rewrites the token (multi-token targets splice in
    // place) and the result keeps flowing through the later stages.
    for (LexiconKind kind : order) {
        const Lexicon& lex = *by_kind[static_cast<int>(kind)];
        std::vector<WorkToken> next;
        next.reserve(work.size());
        for (WorkToken& tok : work) {
            const std::vector<std::string>* target = lex.find(tok.text);
            if (target == nullptr) {
                next.push_back(std::move(tok));
                continue;
            }
            if (kind == LexiconKind::Stopword) {
                continue;
            }
            TokenTag tag = tok.tag == TokenTag::VariantResolved ? TokenTag::VariantResolved : tag_for_kind(kind);
            for (const std::string& t : *target) {
                next.push_back({t, tag, true});
            }
        }
        work = std::move(next);
    }

    // Fuzzy fallback for tokens no stage recognized: match against each
    // stage's keys in order, rewrite with that entry, then cascade through
    // the remaining stages. Stopwords are excluded -- deleting a token on a
    // fuzzy match is too aggressive.
    if (cfg.variant_fallback_enabled && cfg.variant_max_edit_distance >= 1) {
        std::vector<WorkToken> next;
        next.reserve(work.size());
        for (WorkToken& tok : work) {
            if (tok.hit) {
                next.push_back(std::move(tok));
                continue;
            }
            bool resolved = false;
            for (std::size_t si = 0; si < order.size() && !resolved; ++si) {
                if (order[si] == LexiconKind::Stopword) {
                    continue;
                }
                const Lexicon& lex = *by_kind[static_cast<int>(order[si])];
                auto match = resolve_variant(tok.text, lex, cfg.variant_max_edit_distance);
                if (!match) {
                    continue;
                }
                std::vector<std::string> spliced = *lex.find(match->key);
                for (std::size_t sj = si + 1; sj < order.size(); ++sj) {
                    const Lexicon& later = *by_kind[static_cast<int>(order[sj])];
                    std::vector<std::string> rewritten;
                    for (std::string& t : spliced) {
                        const std::vector<std::string>* target = later.find(t);
                        if (target == nullptr) {
                            rewritten.push_back(std::move(t));
                        } else if (later.kind() != LexiconKind::Stopword) {
                            rewritten.insert(rewritten.end(), target->begin(), target->end());
                        }
                    }
                    spliced = std::move(rewritten);
                }
                for (std::string& t : spliced) {
                    next.push_back({std::move(t), TokenTag::VariantResolved, true});
                }
                resolved = true;
            }
            if (!resolved) {
                next.push_back(std::move(tok));
            }
        }
        work = std::move(next);
    }

    // Guarantee that stopwords never survive, whatever later stages spliced
    // in.
    const Lexicon* stopwords = by_kind[static_cast<int>(LexiconKind::Stopword)];
    if (cfg.remove_stopwords && stopwords != nullptr) {
        std::erase_if(work, [&](const WorkToken& tok) { return stopwords->find(tok.text) != nullptr; });
    }

    TokenSeq out;
    out.tokens.reserve(work.size());
    out.tags.reserve(work.size());
    for (WorkToken& tok : work) {
        out.tokens.push_back(std::move(tok.text));
        out.tags.push_back(tok.hit ? tok.tag : TokenTag::Unknown);
    }
    return out;
}

TokenSeq normalize(std::string_view raw_text, const std::vector<Lexicon>& lexicons, const NormalizerConfig& cfg) {
    return apply_lexicons(tokenize(clean(raw_text, cfg)), lexicons, cfg);
}

} // namespace codemix::norm
