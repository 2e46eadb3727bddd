// codemix: classify code-switched Hinglish text as benign / abusive /
// hate-inducing. Subcommands cover the whole workflow: prep (normalize raw
// CSVs), embed (train word vectors), train / transfer (LSTM classifier with
// optional two-stage transfer), eval, grid (hyperparameter search) and
// classify.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codemix/commands.hpp"
#include "codemix/error.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<bool> deterministic;
};

// Precedence: defaults < --config file < --set overrides < dedicated flags.
void apply_globals(codemix::cli::AppConfig& cfg, const GlobalArgs& g) {
    if (!g.config_path.empty()) {
        cfg.load_file(g.config_path);
    }
    for (const std::string& kv : g.overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            codemix::fail("MissingArgument", "--set expects key=value, got '" + kv + "'");
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) {
        cfg.set("seed", std::to_string(*g.seed));
    }
    if (g.jobs) {
        cfg.set("jobs", std::to_string(*g.jobs));
    }
    if (g.deterministic) {
        cfg.set("deterministic", *g.deterministic ? "true" : "false");
    }
}

void add_globals(CLI::App* app, GlobalArgs& g) {
    app->add_option("--config", g.config_path, "key = value configuration file");
    app->add_option("--set", g.overrides, "override a configuration key (key=value, repeatable)");
    app->add_option("--seed", g.seed, "base seed; module seeds derive from it by fixed offsets");
    app->add_option("--jobs", g.jobs, "parallel grid/seed runs (per-run results are unaffected)");
    app->add_option("--deterministic", g.deterministic, "deterministic mode (default true)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"code-switched (Hinglish) abuse and offense classification"};
    app.require_subcommand(1);

    GlobalArgs globals;
    add_globals(&app, globals);

    // prep
    auto* prep = app.add_subcommand("prep", "normalize a raw dataset CSV into a token file");
    std::string prep_input, prep_map, prep_lexdir, prep_output;
    bool keep_urls = false, keep_numbers = false, keep_punct = false, keep_emoticons = false,
         keep_stopwords = false, variant_fallback = false;
    prep->add_option("--input", prep_input, "dataset CSV (id,text,label)")->required();
    prep->add_option("--label-map", prep_map, "label map file")->required();
    prep->add_option("--lexicon-dir", prep_lexdir, "directory with lexicon TSVs")->required();
    prep->add_option("--output", prep_output, "output token file")->required();
    prep->add_flag("--keep-urls", keep_urls, "do not strip URLs");
    prep->add_flag("--keep-numbers", keep_numbers, "do not strip standalone numbers");
    prep->add_flag("--keep-punctuation", keep_punct, "do not strip punctuation");
    prep->add_flag("--keep-emoticons", keep_emoticons, "do not strip emoticons");
    prep->add_flag("--keep-stopwords", keep_stopwords, "do not remove stopwords");
    prep->add_flag("--variant-fallback", variant_fallback, "fuzzy-match unknown tokens against lexicon keys");

    // embed
    auto* embed = app.add_subcommand("embed", "train word embeddings on token files");
    std::vector<std::string> embed_corpora;
    std::string embed_method = "glove", embed_out;
    std::optional<int> embed_dim, embed_window, embed_epochs;
    embed->add_option("--method", embed_method, "glove or sgns")->check(CLI::IsMember({"glove", "sgns"}));
    embed->add_option("--corpus", embed_corpora, "token files (repeatable)")->required();
    embed->add_option("--out", embed_out, "output embedding file")->required();
    embed->add_option("--dim", embed_dim, "embedding dimension (default 100)");
    embed->add_option("--window", embed_window, "context window");
    embed->add_option("--epochs", embed_epochs, "training epochs");

    // train
    auto* train = app.add_subcommand("train", "train the classifier on one dataset");
    std::string train_data, train_emb, train_out, train_report;
    std::string train_seeds;
    train->add_option("--data", train_data, "token file")->required();
    train->add_option("--embeddings", train_emb, "embedding file")->required();
    train->add_option("--out", train_out, "checkpoint output path")->required();
    train->add_option("--report", train_report, "report output path");
    train->add_option("--seeds", train_seeds, "comma-separated seeds (default seed,seed+1,seed+2)");

    // transfer
    auto* transfer = app.add_subcommand("transfer", "two-stage training: source, then target");
    std::string tr_source, tr_target, tr_emb, tr_prefix, tr_report, tr_seeds;
    transfer->add_option("--source", tr_source, "source token file (stage 1)")->required();
    transfer->add_option("--target", tr_target, "target token file (stage 2)")->required();
    transfer->add_option("--embeddings", tr_emb, "embedding file")->required();
    transfer->add_option("--out-prefix", tr_prefix, "checkpoint path prefix")->required();
    transfer->add_option("--report", tr_report, "report output path");
    transfer->add_option("--seeds", tr_seeds, "comma-separated seeds");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ev_ck, ev_emb, ev_data, ev_report, ev_split;
    eval->add_option("--checkpoint", ev_ck, "model checkpoint")->required();
    eval->add_option("--embeddings", ev_emb, "embedding file")->required();
    eval->add_option("--data", ev_data, "token file")->required();
    eval->add_option("--report", ev_report, "report output path");
    eval->add_option("--use-split", ev_split, "all|train|val|test (default all)")
        ->check(CLI::IsMember({"all", "train", "val", "test"}));

    // grid
    auto* grid = app.add_subcommand("grid", "grid search over transfer hyperparameters");
    std::string gr_grid, gr_source, gr_target, gr_emb, gr_outdir, gr_seeds;
    grid->add_option("--grid", gr_grid, "grid file: `name = v1,v2,...` lines")->required();
    grid->add_option("--source", gr_source, "source token file")->required();
    grid->add_option("--target", gr_target, "target token file")->required();
    grid->add_option("--embeddings", gr_emb, "embedding file")->required();
    grid->add_option("--out-dir", gr_outdir, "directory for per-combination reports")->required();
    grid->add_option("--seeds", gr_seeds, "comma-separated seeds");

    // classify
    auto* classify = app.add_subcommand("classify", "label text with a trained model");
    std::string cl_model, cl_emb, cl_lexdir, cl_input;
    std::optional<std::string> cl_text;
    classify->add_option("--model", cl_model, "model checkpoint")->required();
    classify->add_option("--embeddings", cl_emb, "embedding file")->required();
    classify->add_option("--lexicon-dir", cl_lexdir, "directory with lexicon TSVs")->required();
    classify->add_option("--text", cl_text, "classify a single string");
    classify->add_option("--input", cl_input, "classify every row of a CSV (id,text,label)");

    CLI11_PARSE(app, argc, argv);

    try {
        codemix::cli::AppConfig cfg;
        apply_globals(cfg, globals);

        if (prep->parsed()) {
            cfg.set("paths.input", prep_input);
            cfg.set("paths.label_map", prep_map);
            cfg.set("paths.lexicon_dir", prep_lexdir);
            cfg.set("paths.output", prep_output);
            if (keep_urls) cfg.set("normalize.remove_urls", "false");
            if (keep_numbers) cfg.set("normalize.remove_numbers", "false");
            if (keep_punct) cfg.set("normalize.remove_punctuation", "false");
            if (keep_emoticons) cfg.set("normalize.remove_emoticons", "false");
            if (keep_stopwords) cfg.set("normalize.remove_stopwords", "false");
            if (variant_fallback) cfg.set("normalize.variant_fallback_enabled", "true");
            codemix::cli::cmd_prep(cfg, std::cout);
        } else if (embed->parsed()) {
            std::string joined;
            for (std::size_t i = 0; i < embed_corpora.size(); ++i) {
                if (i > 0) joined += ",";
                joined += embed_corpora[i];
            }
            cfg.set("paths.corpus", joined);
            cfg.set("paths.output", embed_out);
            cfg.set("embed.method", embed_method);
            if (embed_dim) {
                cfg.set("glove.dim", std::to_string(*embed_dim));
                cfg.set("sgns.dim", std::to_string(*embed_dim));
            }
            if (embed_window) {
                cfg.set("glove.window", std::to_string(*embed_window));
                cfg.set("sgns.window", std::to_string(*embed_window));
            }
            if (embed_epochs) {
                cfg.set("glove.epochs", std::to_string(*embed_epochs));
                cfg.set("sgns.epochs", std::to_string(*embed_epochs));
            }
            codemix::cli::cmd_embed(cfg, std::cout);
        } else if (train->parsed()) {
            cfg.set("paths.input", train_data);
            cfg.set("paths.embeddings", train_emb);
            cfg.set("paths.checkpoint_out", train_out);
            if (!train_report.empty()) cfg.set("paths.report", train_report);
            if (!train_seeds.empty()) cfg.set("train.seeds", train_seeds);
            codemix::cli::cmd_train(cfg, std::cout);
        } else if (transfer->parsed()) {
            cfg.set("paths.source", tr_source);
            cfg.set("paths.target", tr_target);
            cfg.set("paths.embeddings", tr_emb);
            cfg.set("paths.out_prefix", tr_prefix);
            if (!tr_report.empty()) cfg.set("paths.report", tr_report);
            if (!tr_seeds.empty()) cfg.set("train.seeds", tr_seeds);
            codemix::cli::cmd_transfer(cfg, std::cout);
        } else if (eval->parsed()) {
            cfg.set("paths.checkpoint", ev_ck);
            cfg.set("paths.embeddings", ev_emb);
            cfg.set("paths.input", ev_data);
            if (!ev_report.empty()) cfg.set("paths.report", ev_report);
            if (!ev_split.empty()) cfg.set("eval.split", ev_split);
            codemix::cli::cmd_eval(cfg, std::cout);
        } else if (grid->parsed()) {
            cfg.set("paths.grid", gr_grid);
            cfg.set("paths.source", gr_source);
            cfg.set("paths.target", gr_target);
            cfg.set("paths.embeddings", gr_emb);
            cfg.set("paths.out_dir", gr_outdir);
            if (!gr_seeds.empty()) cfg.set("train.seeds", gr_seeds);
            codemix::cli::cmd_grid(cfg, std::cout);
        } else if (classify->parsed()) {
            cfg.set("paths.model", cl_model);
            cfg.set("paths.embeddings", cl_emb);
            cfg.set("paths.lexicon_dir", cl_lexdir);
            if (!cl_input.empty()) cfg.set("paths.input", cl_input);
            if (!cl_text && cl_input.empty()) {
                codemix::fail("MissingArgument", "classify needs --text or --input");
            }
            codemix::cli::cmd_classify(cfg, cl_text, std::cout);
        }
    } catch (const codemix::Error& e) {
        std::cerr << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "Internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
