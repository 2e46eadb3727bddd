#pragma once

#include <optional>
#include <string_view>

namespace codemix {

// Classification target. Integer codes are stable: they appear in
// checkpoints, reports and the argmax tie-break, so they must never change.
enum class CanonicalLabel : int {
    Benign = 0,
    Abusive = 1,
    HateInducing = 2,
};

inline constexpr int kNumClasses = 3;

constexpr const char* label_name(CanonicalLabel label) {
    switch (label) {
    case CanonicalLabel::Benign: return "benign";
    case CanonicalLabel::Abusive: return "abusive";
    case CanonicalLabel::HateInducing: return "hate";
    }
    return "?";
}

inline std::optional<CanonicalLabel> label_from_name(std::string_view name) {
    if (name == "benign") return CanonicalLabel::Benign;
    if (name == "abusive") return CanonicalLabel::Abusive;
    if (name == "hate") return CanonicalLabel::HateInducing;
    return std::nullopt;
}

} // namespace codemix
