#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bcbench {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n - 1); 0 for a single value
    std::size_t n = 0;
};

// Throws EmptyInput on an empty input.
MeanSd aggregate_mean_sd(std::span<const double> values);

struct OneWayResult {
    double f = 0.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
    double p = 1.0;
    double ss_between = 0.0;
    double ss_within = 0.0;
};

// Needs >= 2 groups of >= 2 finite values. Zero spread everywhere throws
// DegenerateAnova; zero within-group spread with distinct means gives F = inf.
OneWayResult one_way_anova(const std::vector<std::vector<double>>& groups);

struct PairwiseComparison {
    std::size_t a = 0, b = 0;  // group indices, a < b
    double mean_difference = 0.0;  // mean_a - mean_b
    double t = 0.0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;  // min(1, m * p_raw)
    bool significant = false;  // p_raw < alpha / m
};

struct BonferroniResult {
    std::size_t comparisons = 0;
    double alpha = 0.05;
    double threshold = 0.0;  // alpha / comparisons
    std::vector<PairwiseComparison> pairs;
};

// All pairwise t tests using the pooled within-group mean square of the
// one-way ANOVA (df N - g) as the error term.
BonferroniResult bonferroni_posthoc(const std::vector<std::vector<double>>& groups, double alpha = 0.05);

// Balanced full-factorial design. Each observation carries one level index
// per factor.
struct FactorialDesign {
    std::vector<std::string> factors;
    std::vector<std::size_t> levels;  // level count per factor
    struct Observation {
        std::vector<std::size_t> cell;
        double response = 0.0;
        std::string replicate;
    };
    std::vector<Observation> observations;
};

struct AnovaRow {
    std::string effect;
    std::vector<std::size_t> factors;  // empty for the error row
    std::size_t df = 0;
    double ss = 0.0;
    double ms = 0.0;
    double f = 0.0;  // NaN on the error row
    double p = 1.0;  // NaN on the error row
    double partial_eta_sq = 0.0;
};

struct AnovaTable {
    std::vector<AnovaRow> effects;  // all non-empty factor subsets, by size then index order
    AnovaRow error;
    double ss_total = 0.0;
    std::size_t df_total = 0;
    std::size_t replicates = 0;
};

// Throws UnbalancedDesign when cells differ in count or have < 2 replicates.
AnovaTable factorial_anova(const FactorialDesign& design);

// ss_effect / (ss_effect + ss_error); DegenerateEffect when both are zero.
double partial_eta_squared(double ss_effect, double ss_error);

// Aligned text rendering: Source, df, SS, MS, F, p, partial eta squared.
std::string render_anova_table(const AnovaTable& table, const std::string& title);

// Significance stars: *** p < .001, ** p < .01, * p < .05.
std::string significance_stars(double p);

}  // namespace bcbench
