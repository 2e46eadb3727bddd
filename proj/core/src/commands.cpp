#include "codemix/commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "codemix/error.hpp"

namespace codemix::cli {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string require_path(const AppConfig& cfg, const std::string& key, const std::string& flag) {
    std::string v = cfg.get_string(key);
    if (v.empty()) {
        fail("MissingArgument", "required path missing: " + flag);
    }
    return v;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail("FileNotFound", "cannot write: " + path);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        fail("FileNotFound", "short write: " + path);
    }
}

pipeline::Dataset encode_rows(const std::vector<CorpusRow>& rows, const embed::Vocabulary& vocab,
                              int max_seq_len) {
    pipeline::Dataset data;
    data.reserve(rows.size());
    for (const CorpusRow& row : rows) {
        net::EncodedSample s = net::encode_sequence(row.tokens, vocab, max_seq_len);
        s.label = static_cast<int>(row.label);
        data.push_back(std::move(s));
    }
    return data;
}

// Deterministic three-way split of corpus rows, then encoding.
pipeline::SplitDataset split_and_encode(const std::vector<CorpusRow>& rows, const AppConfig& cfg,
                                        const embed::Vocabulary& vocab) {
    std::vector<corpus::LabeledText> samples;
    samples.reserve(rows.size());
    for (const CorpusRow& row : rows) {
        samples.push_back({row.id, {}, row.label, {}});
    }
    corpus::Split sp = corpus::split(samples, cfg.split_spec());

    std::unordered_map<std::string, const CorpusRow*> by_id;
    for (const CorpusRow& row : rows) {
        by_id.emplace(row.id, &row);
    }
    const int max_seq_len = static_cast<int>(cfg.get_int("net.max_seq_len"));
    auto encode_part = [&](const std::vector<corpus::LabeledText>& part) {
        std::vector<CorpusRow> selected;
        selected.reserve(part.size());
        for (const corpus::LabeledText& t : part) {
            selected.push_back(*by_id.at(t.id));
        }
        return encode_rows(selected, vocab, max_seq_len);
    };
    return {encode_part(sp.train), encode_part(sp.val), encode_part(sp.test)};
}

std::string checkpoint_path_for_seed(const std::string& base, std::uint64_t seed, bool multi) {
    if (!multi) {
        return base;
    }
    fs::path p(base);
    std::string stem = p.stem().string();
    std::string ext = p.extension().string();
    return (p.parent_path() / (stem + ".seed" + std::to_string(seed) + ext)).string();
}

} // namespace

// ---------------------------------------------------------------------------
// Normalized corpus files
// ---------------------------------------------------------------------------

void write_token_file(const std::string& path, const std::vector<CorpusRow>& rows) {
    std::string out;
    for (const CorpusRow& row : rows) {
        out += row.id;
        out += '\t';
        out += label_name(row.label);
        out += '\t';
        for (std::size_t i = 0; i < row.tokens.size(); ++i) {
            if (i > 0) {
                out += ' ';
            }
            out += row.tokens[i];
        }
        out += '\n';
    }
    write_file(path, out);
}

std::vector<CorpusRow> read_token_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("FileNotFound", "cannot open corpus file: " + path);
    }
    std::vector<CorpusRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::string where = path + ":" + std::to_string(line_no);
        std::size_t tab1 = line.find('\t');
        std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
            fail("MalformedLine", where + ": expected id<TAB>label<TAB>tokens");
        }
        CorpusRow row;
        row.id = line.substr(0, tab1);
        std::string label = line.substr(tab1 + 1, tab2 - tab1 - 1);
        auto canonical = label_from_name(label);
        if (!canonical) {
            fail("UnknownLabel", where + ": label '" + label + "' is not one of benign, abusive, hate");
        }
        row.label = *canonical;
        std::istringstream tokens(line.substr(tab2 + 1));
        std::string tok;
        while (tokens >> tok) {
            row.tokens.push_back(tok);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Lexicon directory
// ---------------------------------------------------------------------------

std::vector<norm::Lexicon> load_lexicon_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) {
        fail("FileNotFound", "lexicon directory does not exist: " + dir);
    }
    static constexpr std::pair<const char*, norm::LexiconKind> kFiles[] = {
        {"stopwords.tsv", norm::LexiconKind::Stopword},
        {"profanity.tsv", norm::LexiconKind::Profanity},
        {"transliteration.tsv", norm::LexiconKind::Transliteration},
        {"translation.tsv", norm::LexiconKind::Translation},
        {"variants.tsv", norm::LexiconKind::Variant},
    };
    std::vector<norm::Lexicon> lexicons;
    for (const auto& [name, kind] : kFiles) {
        fs::path p = fs::path(dir) / name;
        if (fs::exists(p)) {
            lexicons.push_back(norm::Lexicon::from_file(p.string(), kind));
        }
    }
    if (lexicons.empty()) {
        fail("FileNotFound", "no lexicon files (stopwords/profanity/transliteration/translation/variants .tsv) in " + dir);
    }
    return lexicons;
}

std::string resolved_lexicon_order(const AppConfig& cfg, const std::vector<norm::Lexicon>& lexicons) {
    norm::NormalizerConfig ncfg = cfg.normalizer_config();
    std::vector<norm::LexiconKind> order;
    if (ncfg.lexicon_order.empty()) {
        for (norm::LexiconKind kind : norm::canonical_lexicon_order()) {
            for (const norm::Lexicon& lex : lexicons) {
                if (lex.kind() == kind) {
                    order.push_back(kind);
                    break;
                }
            }
        }
    } else {
        order = ncfg.lexicon_order;
    }
    std::string joined;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0) {
            joined += ",";
        }
        joined += norm::lexicon_kind_name(order[i]);
    }
    return joined;
}

// ---------------------------------------------------------------------------
// prep
// ---------------------------------------------------------------------------

void cmd_prep(AppConfig& cfg, std::ostream& out) {
    const std::string input = require_path(cfg, "paths.input", "--input");
    const std::string map_path = require_path(cfg, "paths.label_map", "--label-map");
    const std::string lexicon_dir = require_path(cfg, "paths.lexicon_dir", "--lexicon-dir");
    const std::string output = require_path(cfg, "paths.output", "--output");

    corpus::LabelMap label_map = corpus::LabelMap::from_file(map_path);
    std::vector<norm::Lexicon> lexicons = load_lexicon_dir(lexicon_dir);
    cfg.set("normalize.lexicon_order", resolved_lexicon_order(cfg, lexicons));
    norm::NormalizerConfig ncfg = cfg.normalizer_config();

    std::vector<corpus::LabeledText> data =
        corpus::load_dataset(input, label_map, cfg.get_bool("corpus.allow_empty"));

    std::vector<CorpusRow> rows;
    rows.reserve(data.size());
    for (const corpus::LabeledText& sample : data) {
        CorpusRow row;
        row.id = sample.id;
        row.label = *sample.label;
        row.tokens = norm::normalize(sample.raw_text, lexicons, ncfg).tokens;
        rows.push_back(std::move(row));
    }
    write_token_file(output, rows);
    out << "prep: " << rows.size() << " samples -> " << output << "\n";
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

void cmd_embed(AppConfig& cfg, std::ostream& out) {
    require_path(cfg, "paths.corpus", "--corpus");
    const std::string output = require_path(cfg, "paths.output", "--out");
    const std::string method = cfg.get_string("embed.method");
    if (method != "glove" && method != "sgns") {
        fail("InvalidConfigValue", "embed.method must be glove or sgns, got '" + method + "'");
    }

    std::vector<norm::TokenSeq> corpus;
    for (const std::string& path : cfg.get_list("paths.corpus")) {
        for (CorpusRow& row : read_token_file(path)) {
            norm::TokenSeq seq;
            seq.tokens = std::move(row.tokens);
            seq.tags.assign(seq.tokens.size(), norm::TokenTag::Passed);
            corpus.push_back(std::move(seq));
        }
    }

    embed::Vocabulary vocab = embed::Vocabulary::build(corpus, cfg.min_count());
    embed::TrainStats stats;
    embed::EmbeddingMatrix emb;
    if (method == "glove") {
        embed::GloveConfig gcfg = cfg.glove_config();
        embed::CooccurrenceTable table = embed::count_cooccurrence(corpus, vocab, gcfg.window);
        emb = embed::train_glove(table, vocab, gcfg, &stats);
    } else {
        emb = embed::train_sgns(corpus, vocab, cfg.sgns_config(), &stats);
    }
    embed::save_embeddings(emb, output);
    out << "embed: method=" << method << " vocab=" << vocab.size() << " dim=" << emb.dim
        << " initial_loss=" << format_double(stats.initial_loss)
        << " final_loss=" << format_double(stats.final_loss) << " -> " << output << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void cmd_train(AppConfig& cfg, std::ostream& out) {
    const std::string input = require_path(cfg, "paths.input", "--data");
    const std::string emb_path = require_path(cfg, "paths.embeddings", "--embeddings");
    const std::string ck_out = require_path(cfg, "paths.checkpoint_out", "--out");

    embed::EmbeddingMatrix emb = embed::load_embeddings(emb_path);
    std::vector<CorpusRow> rows = read_token_file(input);
    pipeline::SplitDataset data = split_and_encode(rows, cfg, emb.vocab);
    pipeline::TrainConfig tcfg = cfg.train_config();

    const bool multi = tcfg.seeds.size() > 1;
    auto experiment = [&](std::uint64_t seed) -> pipeline::Metrics {
        pipeline::StageResult r =
            pipeline::train_stage(data.train, data.val, emb.vectors, std::nullopt, tcfg, tcfg.epochs_stage1,
                                  tcfg.lr, seed);
        net::save_checkpoint(r.params, r.optim, tcfg.net, checkpoint_path_for_seed(ck_out, seed, multi));
        return pipeline::evaluate(r.params, emb.vectors, data.val);
    };
    pipeline::RunReport report = pipeline::run_averaged(experiment, tcfg.seeds, "scratch", cfg.jobs());
    report.config_echo = cfg.echo();

    const std::string report_path = cfg.get_string("paths.report");
    if (!report_path.empty()) {
        write_file(report_path, pipeline::serialize_report(report));
    }
    out << pipeline::format_report_table(report);
    out << "train: checkpoints at " << ck_out << (multi ? " (per-seed suffixes)" : "") << "\n";
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

void cmd_transfer(AppConfig& cfg, std::ostream& out) {
    const std::string source_path = require_path(cfg, "paths.source", "--source");
    const std::string target_path = require_path(cfg, "paths.target", "--target");
    const std::string emb_path = require_path(cfg, "paths.embeddings", "--embeddings");
    const std::string prefix = require_path(cfg, "paths.out_prefix", "--out-prefix");

    embed::EmbeddingMatrix emb = embed::load_embeddings(emb_path);
    pipeline::SplitDataset source = split_and_encode(read_token_file(source_path), cfg, emb.vocab);
    pipeline::SplitDataset target = split_and_encode(read_token_file(target_path), cfg, emb.vocab);
    pipeline::TrainConfig tcfg = cfg.train_config();

    auto experiment = [&](std::uint64_t seed) -> pipeline::Metrics {
        pipeline::TransferResult r = pipeline::transfer_train(source, target, emb.vectors, tcfg, seed);
        net::save_checkpoint(r.stage1.params, r.stage1.optim, tcfg.net,
                             prefix + ".stage1.seed" + std::to_string(seed) + ".ckpt");
        net::save_checkpoint(r.stage2.params, r.stage2.optim, tcfg.net,
                             prefix + ".stage2.seed" + std::to_string(seed) + ".ckpt");
        return r.test_metrics;
    };
    pipeline::RunReport report = pipeline::run_averaged(experiment, tcfg.seeds, "stage2", cfg.jobs());
    report.config_echo = cfg.echo();

    const std::string report_path = cfg.get_string("paths.report");
    if (!report_path.empty()) {
        write_file(report_path, pipeline::serialize_report(report));
    }
    out << pipeline::format_report_table(report);
    out << "transfer: checkpoints at " << prefix << ".stage{1,2}.seed<N>.ckpt\n";
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

void cmd_eval(AppConfig& cfg, std::ostream& out) {
    const std::string ck_path = require_path(cfg, "paths.checkpoint", "--checkpoint");
    const std::string emb_path = require_path(cfg, "paths.embeddings", "--embeddings");
    const std::string input = require_path(cfg, "paths.input", "--data");

    embed::EmbeddingMatrix emb = embed::load_embeddings(emb_path);
    net::Checkpoint ck = net::load_checkpoint(ck_path);
    std::vector<CorpusRow> rows = read_token_file(input);

    const std::string which = cfg.get_string("eval.split");
    pipeline::Dataset data;
    if (which == "all") {
        data = encode_rows(rows, emb.vocab, ck.cfg.max_seq_len);
    } else {
        pipeline::SplitDataset sp = split_and_encode(rows, cfg, emb.vocab);
        if (which == "train") {
            data = std::move(sp.train);
        } else if (which == "val") {
            data = std::move(sp.val);
        } else if (which == "test") {
            data = std::move(sp.test);
        } else {
            fail("InvalidConfigValue", "eval.split must be all, train, val or test");
        }
    }

    pipeline::Metrics m = pipeline::evaluate(ck.params, emb.vectors, data);
    pipeline::RunReport report;
    report.stage = "eval";
    report.runs.push_back({cfg.seed(), m});
    report.mean_accuracy = m.accuracy;
    report.config_echo = cfg.echo();

    const std::string report_path = cfg.get_string("paths.report");
    if (!report_path.empty()) {
        write_file(report_path, pipeline::serialize_report(report));
    }
    out << pipeline::format_report_table(report);
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

namespace {

pipeline::GridSpec read_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("FileNotFound", "cannot open grid file: " + path);
    }
    pipeline::GridSpec grid;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::string stripped = line;
        std::size_t a = stripped.find_first_not_of(" \t");
        if (a == std::string::npos || stripped[a] == '#') {
            continue;
        }
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            fail("MalformedLine", path + ":" + std::to_string(line_no) + ": expected name = v1,v2,...");
        }
        auto trim = [](std::string s) {
            std::size_t x = s.find_first_not_of(" \t");
            if (x == std::string::npos) {
                return std::string();
            }
            std::size_t y = s.find_last_not_of(" \t");
            return s.substr(x, y - x + 1);
        };
        std::string name = trim(stripped.substr(0, eq));
        std::string list = trim(stripped.substr(eq + 1));
        std::vector<double> values;
        std::size_t pos = 0;
        while (pos <= list.size()) {
            std::size_t comma = list.find(',', pos);
            std::string item = trim(list.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (!item.empty()) {
                double v = 0.0;
                auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
                if (ec != std::errc{} || ptr != item.data() + item.size()) {
                    fail("MalformedLine",
                         path + ":" + std::to_string(line_no) + ": '" + item + "' is not a number");
                }
                values.push_back(v);
            }
            if (comma == std::string::npos) {
                break;
            }
            pos = comma + 1;
        }
        grid.axes.emplace_back(std::move(name), std::move(values));
    }
    grid.validate();
    return grid;
}

} // namespace

void cmd_grid(AppConfig& cfg, std::ostream& out) {
    const std::string grid_path = require_path(cfg, "paths.grid", "--grid");
    const std::string source_path = require_path(cfg, "paths.source", "--source");
    const std::string target_path = require_path(cfg, "paths.target", "--target");
    const std::string emb_path = require_path(cfg, "paths.embeddings", "--embeddings");
    const std::string out_dir = require_path(cfg, "paths.out_dir", "--out-dir");

    fs::create_directories(out_dir);
    embed::EmbeddingMatrix emb = embed::load_embeddings(emb_path);
    pipeline::SplitDataset source = split_and_encode(read_token_file(source_path), cfg, emb.vocab);
    pipeline::SplitDataset target = split_and_encode(read_token_file(target_path), cfg, emb.vocab);
    pipeline::GridSpec grid = read_grid_file(grid_path);
    pipeline::TrainConfig base = cfg.train_config();

    pipeline::GridOutcome outcome = pipeline::grid_search(grid, base, source, target, emb.vectors, cfg.jobs());

    for (std::size_t i = 0; i < outcome.reports.size(); ++i) {
        pipeline::RunReport& report = outcome.reports[i];
        // grid.* annotations first, then the shared base config.
        std::vector<std::pair<std::string, std::string>> echo = report.config_echo;
        for (const auto& kv : cfg.echo()) {
            echo.push_back(kv);
        }
        report.config_echo = std::move(echo);
        char name[32];
        std::snprintf(name, sizeof(name), "grid_%03zu.report", i);
        write_file((fs::path(out_dir) / name).string(), pipeline::serialize_report(report));
    }

    // Best configuration as a ready-to-use config file.
    AppConfig best_cfg = cfg;
    for (const auto& [name, value] : outcome.assignments[outcome.best_index]) {
        if (name == "lr") {
            best_cfg.set("train.lr", format_double(value));
        } else if (name == "l2_lambda") {
            best_cfg.set("train.l2_lambda", format_double(value));
        } else if (name == "hidden") {
            best_cfg.set("net.hidden", std::to_string(static_cast<long long>(value)));
        } else if (name == "h1") {
            best_cfg.set("net.h1", std::to_string(static_cast<long long>(value)));
        } else if (name == "h2") {
            best_cfg.set("net.h2", std::to_string(static_cast<long long>(value)));
        } else if (name == "dropout_rate") {
            best_cfg.set("net.dropout_rate", format_double(value));
        } else if (name == "batch_size") {
            best_cfg.set("train.batch_size", std::to_string(static_cast<long long>(value)));
        } else if (name == "epochs_stage1") {
            best_cfg.set("train.epochs_stage1", std::to_string(static_cast<long long>(value)));
        } else if (name == "epochs_stage2") {
            best_cfg.set("train.epochs_stage2", std::to_string(static_cast<long long>(value)));
        } else if (name == "lr_stage2_scale") {
            best_cfg.set("train.lr_stage2_scale", format_double(value));
        }
    }
    std::string best_text = "# best grid configuration (mean val accuracy " +
                            format_double(outcome.reports[outcome.best_index].mean_accuracy) + ")\n";
    for (const auto& [key, value] : best_cfg.echo()) {
        best_text += key + " = " + value + "\n";
    }
    write_file((fs::path(out_dir) / "best.config").string(), best_text);

    out << "grid: " << outcome.reports.size() << " combinations, best #" << outcome.best_index
        << " (mean val accuracy "
        << format_double(outcome.reports[outcome.best_index].mean_accuracy) << ")\n";
    for (std::size_t i = 0; i < outcome.reports.size(); ++i) {
        out << "  combination " << i << ": mean val accuracy "
            << format_double(outcome.reports[i].mean_accuracy) << "\n";
    }
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

void cmd_classify(AppConfig& cfg, const std::optional<std::string>& text, std::ostream& out) {
    const std::string model_path = require_path(cfg, "paths.model", "--model");
    const std::string emb_path = require_path(cfg, "paths.embeddings", "--embeddings");
    const std::string lexicon_dir = require_path(cfg, "paths.lexicon_dir", "--lexicon-dir");

    embed::EmbeddingMatrix emb = embed::load_embeddings(emb_path);
    net::Checkpoint ck = net::load_checkpoint(model_path);
    std::vector<norm::Lexicon> lexicons = load_lexicon_dir(lexicon_dir);
    cfg.set("normalize.lexicon_order", resolved_lexicon_order(cfg, lexicons));
    norm::NormalizerConfig ncfg = cfg.normalizer_config();

    auto classify_one = [&](const std::string& raw, const std::string& id) {
        norm::TokenSeq seq = norm::normalize(raw, lexicons, ncfg);
        net::EncodedSample s = net::encode_sequence(seq.tokens, emb.vocab, ck.cfg.max_seq_len);
        net::Prediction p = net::predict(s.indices, s.mask, emb.vectors, ck.params);
        if (!id.empty()) {
            out << id << '\t';
        }
        out << label_name(p.label) << ' ' << format_double(p.probs(0)) << ' ' << format_double(p.probs(1))
            << ' ' << format_double(p.probs(2)) << "\n";
    };

    if (text) {
        classify_one(*text, "");
        return;
    }
    const std::string input = require_path(cfg, "paths.input", "--text or --input");
    for (const corpus::LabeledText& sample : corpus::load_texts(input, true)) {
        classify_one(sample.raw_text, sample.id);
    }
}

} // namespace codemix::cli
