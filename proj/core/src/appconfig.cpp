#include "codemix/appconfig.hpp"

#include <charconv>
#include <fstream>

#include "codemix/error.hpp"

namespace codemix::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) {
        return "";
    }
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

void AppConfig::register_key(std::string key, std::string default_value) {
    order_.push_back(key);
    values_.emplace(std::move(key), std::move(default_value));
}

AppConfig::AppConfig() {
    register_key("seed", "1");
    register_key("jobs", "1");
    register_key("deterministic", "true");

    register_key("corpus.allow_empty", "false");
    register_key("split.train_fraction", "0.8");
    register_key("split.val_fraction", "0.1");
    register_key("split.test_fraction", "0.1");
    register_key("split.stratified", "true");
    register_key("split.seed", "auto");

    register_key("normalize.remove_urls", "true");
    register_key("normalize.remove_numbers", "true");
    register_key("normalize.remove_punctuation", "true");
    register_key("normalize.remove_emoticons", "true");
    register_key("normalize.remove_stopwords", "true");
    register_key("normalize.variant_max_edit_distance", "1");
    register_key("normalize.variant_fallback_enabled", "false");
    register_key("normalize.lexicon_order", "auto");

    register_key("embed.method", "glove");
    register_key("embed.min_count", "2");
    register_key("glove.dim", "100");
    register_key("glove.window", "5");
    register_key("glove.x_max", "100");
    register_key("glove.alpha", "0.75");
    register_key("glove.learning_rate", "0.05");
    register_key("glove.epochs", "25");
    register_key("glove.seed", "auto");
    register_key("sgns.dim", "100");
    register_key("sgns.window", "5");
    register_key("sgns.negatives", "5");
    register_key("sgns.learning_rate", "0.025");
    register_key("sgns.epochs", "5");
    register_key("sgns.subsample_threshold", "0.001");
    register_key("sgns.seed", "auto");

    register_key("net.hidden", "64");
    register_key("net.h1", "64");
    register_key("net.h2", "32");
    register_key("net.dropout_rate", "0.2");
    register_key("net.max_seq_len", "30");
    register_key("net.embeddings_trainable", "false");

    register_key("train.lr", "0.001");
    register_key("train.beta1", "0.9");
    register_key("train.beta2", "0.999");
    register_key("train.epsilon", "1e-08");
    register_key("train.l2_lambda", "0.0001");
    register_key("train.batch_size", "32");
    register_key("train.epochs_stage1", "10");
    register_key("train.epochs_stage2", "10");
    register_key("train.lr_stage2_scale", "0.1");
    register_key("train.seeds", "auto");
    register_key("train.early_stop_patience", "3");

    register_key("eval.split", "all");

    register_key("paths.input", "");
    register_key("paths.output", "");
    register_key("paths.label_map", "");
    register_key("paths.lexicon_dir", "");
    register_key("paths.corpus", "");
    register_key("paths.embeddings", "");
    register_key("paths.checkpoint", "");
    register_key("paths.checkpoint_out", "");
    register_key("paths.out_prefix", "");
    register_key("paths.report", "");
    register_key("paths.source", "");
    register_key("paths.target", "");
    register_key("paths.grid", "");
    register_key("paths.out_dir", "");
    register_key("paths.model", "");
}

void AppConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("FileNotFound", "cannot open config: " + path);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') {
            continue;
        }
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            fail("MalformedLine", path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.rfind("result.", 0) == 0) {
            continue; // report metrics, not configuration
        }
        set(key, value);
    }
}

void AppConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) {
        fail("UnknownConfigKey", "unknown configuration key '" + key + "'");
    }
    it->second = value;
}

const std::string& AppConfig::get_raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        fail("UnknownConfigKey", "unknown configuration key '" + key + "'");
    }
    return it->second;
}

std::string AppConfig::get_string(const std::string& key) const { return get_raw(key); }

bool AppConfig::get_bool(const std::string& key) const {
    const std::string& v = get_raw(key);
    if (v == "true") return true;
    if (v == "false") return false;
    fail("InvalidConfigValue", "key '" + key + "': expected true or false, got '" + v + "'");
}

std::int64_t AppConfig::get_int(const std::string& key) const {
    const std::string& v = get_raw(key);
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        fail("InvalidConfigValue", "key '" + key + "': '" + v + "' is not an integer");
    }
    return out;
}

double AppConfig::get_double(const std::string& key) const {
    const std::string& v = get_raw(key);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        fail("InvalidConfigValue", "key '" + key + "': '" + v + "' is not a number");
    }
    return out;
}

std::uint64_t AppConfig::get_u64(const std::string& key) const {
    const std::string& v = get_raw(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        fail("InvalidConfigValue", "key '" + key + "': '" + v + "' is not an unsigned integer");
    }
    return out;
}

std::vector<std::string> AppConfig::get_list(const std::string& key) const {
    const std::string& v = get_raw(key);
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        std::size_t comma = v.find(',', pos);
        std::string item = trim(v.substr(pos, comma == std::string::npos ? comma : comma - pos));
        if (!item.empty()) {
            out.push_back(std::move(item));
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

// Fixed offsets: one --seed drives every module unless a key is set
// explicitly.
std::string AppConfig::resolved(const std::string& key) const {
    const std::string& v = get_raw(key);
    if (v != "auto") {
        return v;
    }
    std::uint64_t base = seed();
    if (key == "split.seed") {
        return std::to_string(base + 101);
    }
    if (key == "glove.seed") {
        return std::to_string(base + 201);
    }
    if (key == "sgns.seed") {
        return std::to_string(base + 301);
    }
    if (key == "train.seeds") {
        return std::to_string(base) + "," + std::to_string(base + 1) + "," + std::to_string(base + 2);
    }
    return v; // normalize.lexicon_order resolves against the loaded lexicons
}

corpus::SplitSpec AppConfig::split_spec() const {
    corpus::SplitSpec spec;
    spec.train_fraction = get_double("split.train_fraction");
    spec.val_fraction = get_double("split.val_fraction");
    spec.test_fraction = get_double("split.test_fraction");
    spec.stratified = get_bool("split.stratified");
    std::string s = resolved("split.seed");
    std::uint64_t out = 0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    spec.seed = out;
    spec.validate();
    return spec;
}

norm::NormalizerConfig AppConfig::normalizer_config() const {
    norm::NormalizerConfig cfg;
    cfg.remove_urls = get_bool("normalize.remove_urls");
    cfg.remove_numbers = get_bool("normalize.remove_numbers");
    cfg.remove_punctuation = get_bool("normalize.remove_punctuation");
    cfg.remove_emoticons = get_bool("normalize.remove_emoticons");
    cfg.remove_stopwords = get_bool("normalize.remove_stopwords");
    cfg.variant_max_edit_distance = static_cast<int>(get_int("normalize.variant_max_edit_distance"));
    cfg.variant_fallback_enabled = get_bool("normalize.variant_fallback_enabled");
    if (!is_set_to_auto("normalize.lexicon_order")) {
        for (const std::string& name : get_list("normalize.lexicon_order")) {
            auto kind = norm::lexicon_kind_from_name(name);
            if (!kind) {
                fail("InvalidConfigValue", "normalize.lexicon_order: unknown lexicon kind '" + name + "'");
            }
            cfg.lexicon_order.push_back(*kind);
        }
    }
    if (cfg.variant_max_edit_distance < 0) {
        fail("InvalidConfigValue", "normalize.variant_max_edit_distance must be >= 0");
    }
    return cfg;
}

embed::GloveConfig AppConfig::glove_config() const {
    embed::GloveConfig cfg;
    cfg.dim = static_cast<int>(get_int("glove.dim"));
    cfg.window = static_cast<int>(get_int("glove.window"));
    cfg.x_max = get_double("glove.x_max");
    cfg.alpha = get_double("glove.alpha");
    cfg.learning_rate = get_double("glove.learning_rate");
    cfg.epochs = static_cast<int>(get_int("glove.epochs"));
    std::string s = resolved("glove.seed");
    std::from_chars(s.data(), s.data() + s.size(), cfg.seed);
    cfg.validate();
    return cfg;
}

embed::SgnsConfig AppConfig::sgns_config() const {
    embed::SgnsConfig cfg;
    cfg.dim = static_cast<int>(get_int("sgns.dim"));
    cfg.window = static_cast<int>(get_int("sgns.window"));
    cfg.negatives = static_cast<int>(get_int("sgns.negatives"));
    cfg.learning_rate = get_double("sgns.learning_rate");
    cfg.epochs = static_cast<int>(get_int("sgns.epochs"));
    cfg.subsample_threshold = get_double("sgns.subsample_threshold");
    std::string s = resolved("sgns.seed");
    std::from_chars(s.data(), s.data() + s.size(), cfg.seed);
    cfg.validate();
    return cfg;
}

std::vector<std::uint64_t> AppConfig::train_seeds() const {
    std::string joined = resolved("train.seeds");
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= joined.size()) {
        std::size_t comma = joined.find(',', pos);
        std::string item = trim(joined.substr(pos, comma == std::string::npos ? comma : comma - pos));
        if (!item.empty()) {
            std::uint64_t v = 0;
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc{} || ptr != item.data() + item.size()) {
                fail("InvalidConfigValue", "train.seeds: '" + item + "' is not an unsigned integer");
            }
            seeds.push_back(v);
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (seeds.empty()) {
        fail("InvalidConfigValue", "train.seeds must name at least one seed");
    }
    return seeds;
}

pipeline::TrainConfig AppConfig::train_config() const {
    pipeline::TrainConfig cfg;
    cfg.net.hidden = static_cast<int>(get_int("net.hidden"));
    cfg.net.h1 = static_cast<int>(get_int("net.h1"));
    cfg.net.h2 = static_cast<int>(get_int("net.h2"));
    cfg.net.dropout_rate = get_double("net.dropout_rate");
    cfg.net.max_seq_len = static_cast<int>(get_int("net.max_seq_len"));
    cfg.net.embeddings_trainable = get_bool("net.embeddings_trainable");
    cfg.lr = get_double("train.lr");
    cfg.beta1 = get_double("train.beta1");
    cfg.beta2 = get_double("train.beta2");
    cfg.epsilon = get_double("train.epsilon");
    cfg.l2_lambda = get_double("train.l2_lambda");
    cfg.batch_size = static_cast<int>(get_int("train.batch_size"));
    cfg.epochs_stage1 = static_cast<int>(get_int("train.epochs_stage1"));
    cfg.epochs_stage2 = static_cast<int>(get_int("train.epochs_stage2"));
    cfg.lr_stage2_scale = get_double("train.lr_stage2_scale");
    cfg.seeds = train_seeds();
    cfg.early_stop_patience = static_cast<int>(get_int("train.early_stop_patience"));
    cfg.validate();
    return cfg;
}

int AppConfig::min_count() const {
    std::int64_t v = get_int("embed.min_count");
    if (v < 1) {
        fail("InvalidConfigValue", "embed.min_count must be >= 1");
    }
    return static_cast<int>(v);
}

std::vector<std::pair<std::string, std::string>> AppConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(order_.size());
    for (const std::string& key : order_) {
        out.emplace_back(key, resolved(key));
    }
    return out;
}

} // namespace codemix::cli
