#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "codemix/corpus.hpp"
#include "codemix/embed.hpp"
#include "codemix/normalize.hpp"
#include "codemix/pipeline.hpp"

namespace codemix::cli {

// Flat key=value configuration with a closed key registry. Defaults cover
// every tunable; a config file and CLI flags override them; `echo()` yields
// the full effective configuration, which every report embeds so a run can
// be reproduced by feeding the report back via --config.
class AppConfig {
public:
    AppConfig();

    // `key = value` lines, '#' comments. Keys under `result.` are ignored so
    // report files are themselves valid config files.
    void load_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    const std::string& get_raw(const std::string& key) const;
    bool is_set_to_auto(const std::string& key) const { return get_raw(key) == "auto"; }

    std::string get_string(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const; // comma-separated

    std::uint64_t seed() const { return get_u64("seed"); }
    int jobs() const { return static_cast<int>(get_int("jobs")); }
    bool deterministic() const { return get_bool("deterministic"); }

    // Module views, with `auto` seeds resolved by fixed offsets from `seed`.
    corpus::SplitSpec split_spec() const;
    norm::NormalizerConfig normalizer_config() const;
    embed::GloveConfig glove_config() const;
    embed::SgnsConfig sgns_config() const;
    pipeline::TrainConfig train_config() const;
    int min_count() const;
    std::vector<std::uint64_t> train_seeds() const;

    // Full effective configuration in registration order, with every `auto`
    // resolved to its concrete value.
    std::vector<std::pair<std::string, std::string>> echo() const;

private:
    void register_key(std::string key, std::string default_value);
    std::string resolved(const std::string& key) const;

    std::vector<std::string> order_;
    std::unordered_map<std::string, std::string> values_;
};

} // namespace codemix::cli
