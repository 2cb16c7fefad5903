#include "bcbench/config.hpp"

#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace bcbench {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

FlatConfig FlatConfig::parse(std::string_view text) {
    FlatConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = trim(std::string_view(t).substr(eq + 1));
    }
    return cfg;
}

FlatConfig FlatConfig::load(const std::string& path) { return parse(read_text_file(path)); }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    const auto& s = it->second;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not a number: '" + s + "'");
    return v;
}

std::int64_t FlatConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    const auto& s = it->second;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not an integer: '" + s + "'");
    return v;
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(key + ": not a non-negative integer: '" + s + "'");
    return v;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": not a boolean: '" + s + "'");
}

std::string FlatConfig::to_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
}

const std::vector<std::pair<std::string, std::string>>& run_config_keys() {
    static const std::vector<std::pair<std::string, std::string>> kKeys{
        {"seed", "master seed"},
        {"synth.n", "records to generate"},
        {"synth.children", "children (1..20)"},
        {"synth.sessions_per_child", "sessions per child"},
        {"synth.env_signal", "environment signal strength in [0,1]"},
        {"synth.behavior_signal", "behavior-flag signal strength in [0,1]"},
        {"labels.mapping", "optional 7->3->2 mapping file"},
        {"weather.mode", "fixture | live"},
        {"impute.k", "neighbors for k-NN imputation"},
        {"impute.session_fill", "fill from the same session before k-NN"},
        {"cv.folds", "cross-validation folds"},
        {"boruta.alpha", "binomial test level"},
        {"boruta.max_runs", "maximum Boruta runs"},
        {"boruta.trees", "trees in the Boruta forest"},
        {"boruta.keep_tentative", "keep Tentative features"},
        {"boruta.select_on_full", "select once on the full data instead of per fold"},
        {"rf.trees", "random forest trees"},
        {"rf.mtry", "features per split, 0 = floor(sqrt(p))"},
        {"rf.min_leaf", "minimum rows per leaf"},
        {"rf.max_depth", "depth limit, 0 = unlimited"},
        {"gbt.rounds", "boosting rounds"},
        {"gbt.max_depth", "boosted tree depth"},
        {"gbt.learning_rate", "shrinkage"},
        {"gbt.lambda", "L2 penalty on leaf weights"},
        {"gbt.gamma", "minimum split gain"},
        {"gbt.min_child_weight", "minimum hessian per child"},
        {"svm.c", "soft-margin penalty"},
        {"svm.gamma", "RBF width, 0 = 1/p"},
        {"svm.tolerance", "SMO stopping tolerance"},
        {"nn.hidden", "hidden units"},
        {"nn.learning_rate", "gradient step"},
        {"nn.epochs", "training epochs"},
        {"nn.batch_size", "mini-batch size"},
        {"threads", "worker threads, 0 = all cores"},
    };
    return kKeys;
}

RunConfig RunConfig::from(const FlatConfig& f) {
    std::set<std::string> known;
    for (const auto& [k, _] : run_config_keys()) known.insert(k);
    for (const auto& [k, _] : f.values())
        if (!known.count(k)) throw ConfigError("unknown configuration key '" + k + "'");

    RunConfig c;
    auto size = [&](const std::string& key, std::size_t fallback) {
        const auto v = f.get_int(key, static_cast<std::int64_t>(fallback));
        if (v < 0) throw ConfigError(key + " must be non-negative");
        return static_cast<std::size_t>(v);
    };
    c.seed = f.get_u64("seed", c.seed);
    c.n_records = size("synth.n", c.n_records);
    c.n_children = size("synth.children", c.n_children);
    c.sessions_per_child = size("synth.sessions_per_child", c.sessions_per_child);
    c.env_signal = f.get_double("synth.env_signal", c.env_signal);
    c.behavior_signal = f.get_double("synth.behavior_signal", c.behavior_signal);
    c.label_mapping = f.get_string("labels.mapping", c.label_mapping);
    c.weather_mode = f.get_string("weather.mode", c.weather_mode);
    c.impute_k = size("impute.k", c.impute_k);
    c.session_fill = f.get_bool("impute.session_fill", c.session_fill);
    c.folds = size("cv.folds", c.folds);
    c.boruta.alpha = f.get_double("boruta.alpha", c.boruta.alpha);
    c.boruta.max_runs = size("boruta.max_runs", c.boruta.max_runs);
    c.boruta.forest.n_trees = size("boruta.trees", c.boruta.forest.n_trees);
    c.keep_tentative = f.get_bool("boruta.keep_tentative", c.keep_tentative);
    c.select_on_full = f.get_bool("boruta.select_on_full", c.select_on_full);
    auto& L = c.learner;
    L.rf.n_trees = size("rf.trees", L.rf.n_trees);
    L.rf.mtry = size("rf.mtry", L.rf.mtry);
    L.rf.min_leaf = size("rf.min_leaf", L.rf.min_leaf);
    L.rf.max_depth = size("rf.max_depth", L.rf.max_depth);
    L.gbt.rounds = size("gbt.rounds", L.gbt.rounds);
    L.gbt.max_depth = size("gbt.max_depth", L.gbt.max_depth);
    L.gbt.learning_rate = f.get_double("gbt.learning_rate", L.gbt.learning_rate);
    L.gbt.lambda = f.get_double("gbt.lambda", L.gbt.lambda);
    L.gbt.gamma = f.get_double("gbt.gamma", L.gbt.gamma);
    L.gbt.min_child_weight = f.get_double("gbt.min_child_weight", L.gbt.min_child_weight);
    L.svm.c = f.get_double("svm.c", L.svm.c);
    L.svm.gamma = f.get_double("svm.gamma", L.svm.gamma);
    L.svm.tolerance = f.get_double("svm.tolerance", L.svm.tolerance);
    L.nn.hidden = size("nn.hidden", L.nn.hidden);
    L.nn.learning_rate = f.get_double("nn.learning_rate", L.nn.learning_rate);
    L.nn.epochs = size("nn.epochs", L.nn.epochs);
    L.nn.batch_size = size("nn.batch_size", L.nn.batch_size);
    c.threads = size("threads", c.threads);
    c.validate();
    return c;
}

FlatConfig RunConfig::to_flat() const {
    FlatConfig f;
    auto num = [](double v) { return format_number(v); };
    f.set("seed", std::to_string(seed));
    f.set("synth.n", std::to_string(n_records));
    f.set("synth.children", std::to_string(n_children));
    f.set("synth.sessions_per_child", std::to_string(sessions_per_child));
    f.set("synth.env_signal", num(env_signal));
    f.set("synth.behavior_signal", num(behavior_signal));
    if (!label_mapping.empty()) f.set("labels.mapping", label_mapping);
    f.set("weather.mode", weather_mode);
    f.set("impute.k", std::to_string(impute_k));
    f.set("impute.session_fill", session_fill ? "true" : "false");
    f.set("cv.folds", std::to_string(folds));
    f.set("boruta.alpha", num(boruta.alpha));
    f.set("boruta.max_runs", std::to_string(boruta.max_runs));
    f.set("boruta.trees", std::to_string(boruta.forest.n_trees));
    f.set("boruta.keep_tentative", keep_tentative ? "true" : "false");
    f.set("boruta.select_on_full", select_on_full ? "true" : "false");
    const auto& L = learner;
    f.set("rf.trees", std::to_string(L.rf.n_trees));
    f.set("rf.mtry", std::to_string(L.rf.mtry));
    f.set("rf.min_leaf", std::to_string(L.rf.min_leaf));
    f.set("rf.max_depth", std::to_string(L.rf.max_depth));
    f.set("gbt.rounds", std::to_string(L.gbt.rounds));
    f.set("gbt.max_depth", std::to_string(L.gbt.max_depth));
    f.set("gbt.learning_rate", num(L.gbt.learning_rate));
    f.set("gbt.lambda", num(L.gbt.lambda));
    f.set("gbt.gamma", num(L.gbt.gamma));
    f.set("gbt.min_child_weight", num(L.gbt.min_child_weight));
    f.set("svm.c", num(L.svm.c));
    f.set("svm.gamma", num(L.svm.gamma));
    f.set("svm.tolerance", num(L.svm.tolerance));
    f.set("nn.hidden", std::to_string(L.nn.hidden));
    f.set("nn.learning_rate", num(L.nn.learning_rate));
    f.set("nn.epochs", std::to_string(L.nn.epochs));
    f.set("nn.batch_size", std::to_string(L.nn.batch_size));
    f.set("threads", std::to_string(threads));
    return f;
}

void RunConfig::validate() const {
    if (n_records < 1) throw ConfigError("synth.n must be >= 1");
    if (n_children < 1 || n_children > 20) throw ConfigError("synth.children must lie in 1..20");
    if (!(env_signal >= 0.0 && env_signal <= 1.0)) throw ConfigError("synth.env_signal must lie in [0, 1]");
    if (!(behavior_signal >= 0.0 && behavior_signal <= 1.0))
        throw ConfigError("synth.behavior_signal must lie in [0, 1]");
    if (weather_mode != "fixture" && weather_mode != "live") throw ConfigError("weather.mode must be fixture or live");
    if (impute_k < 1) throw ConfigError("impute.k must be >= 1");
    if (folds < 2) throw ConfigError("cv.folds must be >= 2");
    boruta.validate();
    for (auto k : kAllLearners) {
        LearnerSpec s = learner;
        s.kind = k;
        s.validate();
    }
}

}  // namespace bcbench
