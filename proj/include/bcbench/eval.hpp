#pragma once

#include "bcbench/datamodel.hpp"
#include "bcbench/learners.hpp"
#include "bcbench/stats.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bcbench {

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Per class: shuffle, then the first clamp(round(ratio * count), 1, count - 1)
// rows train. Throws StratificationError for a class with a single row.
SplitIndices stratified_split(std::span<const int> labels, double ratio, std::uint64_t seed);

struct TrainTest {
    FeatureMatrix train;
    FeatureMatrix test;
};
TrainTest stratified_split(const FeatureMatrix& m, double ratio, std::uint64_t seed);

struct FoldPlan {
    std::size_t k = 10;
    std::vector<std::vector<std::size_t>> folds;  // sorted row indices
    bool stratified = true;
    std::uint64_t seed = 0;

    std::size_t rows() const;
    // Every row except those of fold `f`, ascending.
    std::vector<std::size_t> training_rows(std::size_t f) const;
    // FoldError unless the folds partition 0..n-1.
    void validate(std::size_t n) const;
};

// Each class is shuffled and dealt round-robin, the dealing position carrying
// over from one class to the next, so every fold holds floor or ceil of
// count/k rows of each class. Throws FoldError when k < 2, k > n or k exceeds
// the smallest present class.
FoldPlan kfold_plan(std::span<const int> labels, std::size_t k, std::uint64_t seed);
FoldPlan kfold_plan(const FeatureMatrix& m, std::size_t k, std::uint64_t seed);

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const { return n_; }
    std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
    void add(std::size_t truth, std::size_t predicted, std::size_t count = 1) {
        counts_[truth * n_ + predicted] += count;
    }
    void merge(const ConfusionMatrix& other);
    std::size_t total() const;
    std::size_t trace() const;
    std::string to_csv(std::span<const std::string_view> class_names = {}) const;

    static ConfusionMatrix from(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> counts_;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
};

struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;  // sensitivity
    double specificity = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
};

// One-vs-rest view of class c; ratios with a zero denominator are 0.
ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t c);

// Macro averages over every class of the matrix; f1 is the harmonic mean of
// the macro precision and macro recall. AUC is left at 0 for the caller.
// Throws EmptyInput when the matrix is empty.
MetricSet compute_metrics(const ConfusionMatrix& cm);

// Mann-Whitney AUC of scores for positives vs negatives, ties counted 1/2.
// Throws EmptyInput when either side is empty.
double auc_binary(std::span<const double> scores, std::span<const std::uint8_t> positive);

struct AucResult {
    double auc = 0.0;
    std::vector<std::size_t> excluded;  // classes lacking positives or negatives
};

// Macro one-vs-rest AUC over the classes that have both positives and
// negatives. Throws EmptyInput when no class qualifies.
AucResult auc_ovr(const std::vector<std::vector<double>>& scores, std::span<const int> labels);

struct RunResult {
    std::vector<MetricSet> folds;
    MetricSet mean;
    MetricSet sd;
    ConfusionMatrix confusion;
    // Column names used per fold, when a per-fold selection applied.
    std::vector<std::vector<std::string>> fold_columns;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

// Mean and sample SD of each metric over folds, via aggregate_mean_sd.
void summarize_folds(RunResult& r);

// Fits on k-1 folds and scores the held-out fold, for every fold. The
// learner seed of fold f is derive_seed(spec.seed, {f}). `fold_columns`, when
// given, holds column indices to keep in fold f. Learner errors are rethrown
// as FoldFailure with the original nested.
RunResult cross_validate(const LearnerSpec& spec, const FeatureMatrix& m, const FoldPlan& plan,
                         const std::vector<std::vector<std::size_t>>* fold_columns = nullptr);

// Single 80/20 holdout evaluation.
RunResult holdout_evaluate(const LearnerSpec& spec, const FeatureMatrix& m, double ratio, std::uint64_t seed);

}  // namespace bcbench
