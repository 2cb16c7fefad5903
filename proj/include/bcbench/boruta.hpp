#pragma once

#include "bcbench/datamodel.hpp"
#include "bcbench/forest.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bcbench {

enum class BorutaDecision { confirmed, tentative, rejected };
std::string_view to_string(BorutaDecision d);

struct BorutaConfig {
    double alpha = 0.01;
    std::size_t max_runs = 100;
    // Shadow-contest forest. Smaller than the classifier forest: the
    // importance Z-scores only need a stable ranking.
    ForestParams forest{.n_trees = 50};
    // Lower bound on shadows per run; the shadow set is cycled when fewer
    // features are undecided.
    std::size_t min_shadows = 5;
    std::uint64_t seed = 0;

    void validate() const;  // ConfigError
};

struct BorutaFeature {
    std::string name;
    BorutaDecision decision = BorutaDecision::tentative;
    std::size_t hits = 0;
    std::size_t runs = 0;  // runs in which the feature was still undecided
    std::optional<std::size_t> decided_at_run;
    double last_z = 0.0;
};

struct BorutaRun {
    std::size_t run = 0;  // 1-based
    double max_shadow_z = 0.0;
    std::size_t shadows = 0;
    std::vector<std::size_t> tested;  // undecided feature indices in this run
};

struct BorutaReport {
    std::vector<BorutaFeature> features;  // input column order
    std::vector<BorutaRun> runs;
    double alpha = 0.01;
    std::size_t max_runs = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> indices(BorutaDecision d) const;
    std::size_t count(BorutaDecision d) const;
    std::string to_json() const;
};

// Throws InvalidLabels when the labels hold a single class, EmptyInput with
// fewer than two features.
BorutaReport boruta_select(const FeatureMatrix& matrix, const BorutaConfig& cfg);

// Columns kept by the report, in input order.
std::vector<std::size_t> selected_columns(const BorutaReport& report, bool keep_tentative);

// Throws EmptySelection when nothing is kept, SchemaError when the report
// describes other columns.
FeatureMatrix apply_selection(const FeatureMatrix& matrix, const BorutaReport& report, bool keep_tentative);

}  // namespace bcbench
