#pragma once

#include "bcbench/boruta.hpp"
#include "bcbench/learners.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bcbench {

// Flat `key = value` file. `#` starts a comment; blank lines are ignored;
// later assignments win.
class FlatConfig {
public:
    static FlatConfig parse(std::string_view text);
    static FlatConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Sorted, canonical text: identical settings give identical bytes.
    std::string to_text() const;

private:
    std::map<std::string, std::string> values_;
};

// Every setting of an end-to-end run.
struct RunConfig {
    std::uint64_t seed = 20230101;

    // synth
    std::size_t n_records = 292;
    std::size_t n_children = 20;
    std::size_t sessions_per_child = 5;
    double env_signal = 0.8;
    double behavior_signal = 0.5;
    std::string label_mapping;  // optional mapping file

    // ingest / impute
    std::string weather_mode = "fixture";  // fixture | live
    std::size_t impute_k = 14;
    bool session_fill = true;

    // evaluation grid
    std::size_t folds = 10;
    BorutaConfig boruta;
    bool keep_tentative = false;
    bool select_on_full = false;
    LearnerSpec learner;  // hyperparameters for every kind; kind/seed set per cell
    std::size_t threads = 0;  // 0 means hardware concurrency

    static RunConfig from(const FlatConfig& flat);  // ConfigError on unknown keys or bad values
    FlatConfig to_flat() const;
    void validate() const;
};

// Known keys with their meaning, for `--help` style listings.
const std::vector<std::pair<std::string, std::string>>& run_config_keys();

}  // namespace bcbench
