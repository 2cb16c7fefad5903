#include "bcbench/boruta.hpp"

#include "bcbench/distributions.hpp"
#include "bcbench/error.hpp"
#include "bcbench/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bcbench {

std::string_view to_string(BorutaDecision d) {
    switch (d) {
        case BorutaDecision::confirmed: return "Confirmed";
        case BorutaDecision::tentative: return "Tentative";
        case BorutaDecision::rejected: return "Rejected";
    }
    return "?";
}

void BorutaConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("boruta alpha must lie in (0, 1)");
    if (max_runs < 1) throw ConfigError("boruta max_runs must be >= 1");
    if (forest.n_trees < 2) throw ConfigError("boruta forest needs at least two trees for Z-scores");
}

std::vector<std::size_t> BorutaReport::indices(BorutaDecision d) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].decision == d) out.push_back(i);
    return out;
}

std::size_t BorutaReport::count(BorutaDecision d) const { return indices(d).size(); }

std::string BorutaReport::to_json() const {
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : features)
        feats.push_back({{"name", f.name},
                         {"decision", to_string(f.decision)},
                         {"hits", f.hits},
                         {"runs", f.runs},
                         {"decided_at_run", f.decided_at_run ? nlohmann::json(*f.decided_at_run) : nlohmann::json()}});
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& r : runs)
        trace.push_back({{"run", r.run}, {"max_shadow_z", r.max_shadow_z}, {"shadows", r.shadows}, {"tested", r.tested}});
    nlohmann::json doc = {{"alpha", alpha},
                          {"max_runs", max_runs},
                          {"seed", seed},
                          {"confirmed", count(BorutaDecision::confirmed)},
                          {"tentative", count(BorutaDecision::tentative)},
                          {"rejected", count(BorutaDecision::rejected)},
                          {"features", feats},
                          {"runs", trace}};
    return doc.dump(2) + "\n";
}

namespace {

double z_score(const std::vector<std::vector<double>>& per_tree, std::size_t feature) {
    const std::size_t t = per_tree.size();
    double sum = 0.0;
    for (const auto& tree : per_tree) sum += tree[feature];
    const double mean = sum / static_cast<double>(t);
    double ss = 0.0;
    for (const auto& tree : per_tree) ss += (tree[feature] - mean) * (tree[feature] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(t - 1));
    if (sd == 0.0) return mean > 0.0 ? std::numeric_limits<double>::max() : 0.0;
    return mean / sd;
}

}  // namespace

BorutaReport boruta_select(const FeatureMatrix& m, const BorutaConfig& cfg) {
    cfg.validate();
    if (m.cols() < 2) throw EmptyInput("boruta needs at least two features");
    if (m.rows() == 0) throw EmptyInput("boruta needs rows");
    const auto& y = m.labels();
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end())
        throw InvalidLabels("boruta needs at least two classes");

    const std::size_t n = m.rows();
    BorutaReport report;
    report.alpha = cfg.alpha;
    report.max_runs = cfg.max_runs;
    report.seed = cfg.seed;
    for (const auto& name : m.column_names()) {
        BorutaFeature f;
        f.name = name;
        report.features.push_back(std::move(f));
    }

    std::vector<std::vector<double>> columns(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) columns[c] = m.column(c);

    for (std::size_t run = 1; run <= cfg.max_runs; ++run) {
        std::vector<std::size_t> undecided, active;
        for (std::size_t i = 0; i < report.features.size(); ++i) {
            const auto d = report.features[i].decision;
            if (d == BorutaDecision::tentative) undecided.push_back(i);
            if (d != BorutaDecision::rejected) active.push_back(i);
        }
        if (undecided.empty()) break;

        Rng shuffle_rng(derive_seed(cfg.seed, {run, 0}));
        const std::size_t n_shadows = std::max(undecided.size(), cfg.min_shadows);
        const std::size_t width = active.size() + n_shadows;
        std::vector<std::string> names;
        names.reserve(width);
        std::vector<double> values(n * width);
        for (std::size_t j = 0; j < active.size(); ++j) {
            names.push_back(m.column_names()[active[j]]);
            for (std::size_t r = 0; r < n; ++r) values[r * width + j] = columns[active[j]][r];
        }
        for (std::size_t s = 0; s < n_shadows; ++s) {
            const auto& src = columns[undecided[s % undecided.size()]];
            const auto perm = shuffle_rng.permutation(n);
            const std::size_t j = active.size() + s;
            names.push_back("shadow_" + std::to_string(s));
            for (std::size_t r = 0; r < n; ++r) values[r * width + j] = src[perm[r]];
        }
        const FeatureMatrix augmented(std::move(names), n, std::move(values), y, m.class_level());
        const auto forest = RandomForest::fit(augmented, cfg.forest, derive_seed(cfg.seed, {run, 1}), true);
        const auto& imp = forest.tree_importance();

        double max_shadow = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < n_shadows; ++s) max_shadow = std::max(max_shadow, z_score(imp, active.size() + s));

        BorutaRun trace;
        trace.run = run;
        trace.max_shadow_z = max_shadow;
        trace.shadows = n_shadows;
        trace.tested = undecided;
        for (std::size_t j = 0; j < active.size(); ++j) {
            auto& f = report.features[active[j]];
            f.last_z = z_score(imp, j);
            if (f.decision != BorutaDecision::tentative) continue;
            ++f.runs;
            if (f.last_z > max_shadow) ++f.hits;
            const double p = binomial_two_sided(f.hits, f.runs, 0.5);
            if (p < cfg.alpha) {
                f.decision = 2 * f.hits > f.runs ? BorutaDecision::confirmed : BorutaDecision::rejected;
                f.decided_at_run = run;
            }
        }
        report.runs.push_back(std::move(trace));
    }
    return report;
}

std::vector<std::size_t> selected_columns(const BorutaReport& report, bool keep_tentative) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < report.features.size(); ++i) {
        const auto d = report.features[i].decision;
        if (d == BorutaDecision::confirmed || (keep_tentative && d == BorutaDecision::tentative)) out.push_back(i);
    }
    return out;
}

FeatureMatrix apply_selection(const FeatureMatrix& matrix, const BorutaReport& report, bool keep_tentative) {
    if (report.features.size() != matrix.cols()) throw SchemaError("report covers a different column set");
    for (std::size_t i = 0; i < matrix.cols(); ++i)
        if (report.features[i].name != matrix.column_names()[i])
            throw SchemaError("report column '" + report.features[i].name + "' does not match the matrix");
    const auto keep = selected_columns(report, keep_tentative);
    if (keep.empty()) throw EmptySelection("feature selection retained no columns");
    return matrix.select_columns(keep);
}

}  // namespace bcbench
