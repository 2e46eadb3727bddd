#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "codemix/appconfig.hpp"

namespace codemix::cli {

// One line of a normalized corpus file: `id<TAB>label<TAB>tokens`.
struct CorpusRow {
    std::string id;
    CanonicalLabel label = CanonicalLabel::Benign;
    std::vector<std::string> tokens;
};

void write_token_file(const std::string& path, const std::vector<CorpusRow>& rows);
std::vector<CorpusRow> read_token_file(const std::string& path);

// Loads the conventional files from a lexicon directory: stopwords.tsv,
// profanity.tsv, transliteration.tsv, translation.tsv, variants.tsv.
// Missing files are simply absent lexicons; an unreadable directory or a
// directory with none of them is an error.
std::vector<norm::Lexicon> load_lexicon_dir(const std::string& dir);

// The stage order `auto` resolves to for a given lexicon set, as a
// comma-separated string for the config echo.
std::string resolved_lexicon_order(const AppConfig& cfg, const std::vector<norm::Lexicon>& lexicons);

// Subcommand entry points. Paths and options come from the AppConfig
// (paths.* keys); progress goes to `out`, errors are thrown.
void cmd_prep(AppConfig& cfg, std::ostream& out);
void cmd_embed(AppConfig& cfg, std::ostream& out);
void cmd_train(AppConfig& cfg, std::ostream& out);
void cmd_transfer(AppConfig& cfg, std::ostream& out);
void cmd_eval(AppConfig& cfg, std::ostream& out);
void cmd_grid(AppConfig& cfg, std::ostream& out);
void cmd_classify(AppConfig& cfg, const std::optional<std::string>& text, std::ostream& out);

} // namespace codemix::cli
