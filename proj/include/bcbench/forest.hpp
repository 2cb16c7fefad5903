#pragma once

#include "bcbench/datamodel.hpp"
#include "bcbench/random.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace bcbench {

// Per-column rank codes. Tree learners split between consecutive distinct
// values, so they only need each cell's rank among its column's distinct
// values plus the values themselves to place thresholds.
class BinnedMatrix {
public:
    BinnedMatrix() = default;
    explicit BinnedMatrix(const FeatureMatrix& m);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return uniques_.size(); }
    std::uint32_t code(std::size_t r, std::size_t c) const { return codes_[c * rows_ + r]; }
    const std::uint32_t* column_codes(std::size_t c) const { return codes_.data() + c * rows_; }
    std::size_t distinct(std::size_t c) const { return uniques_[c].size(); }
    // Rows ordered by value in column c, ties by row index.
    std::span<const std::uint32_t> sorted_rows(std::size_t c) const { return {order_.data() + c * rows_, rows_}; }
    // Midpoint between the values with codes lo and hi (lo < hi).
    double threshold(std::size_t c, std::uint32_t lo, std::uint32_t hi) const;

private:
    std::size_t rows_ = 0;
    std::vector<std::uint32_t> codes_;  // column-major
    std::vector<std::uint32_t> order_;  // column-major
    std::vector<std::vector<double>> uniques_;
};

// Flat binary tree. Internal nodes send x[feature] <= threshold left.
struct TreeNode {
    std::int32_t feature = -1;  // -1 for leaves
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf output: class index (classification) or weight
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const TreeNode& leaf_for(std::span<const double> row) const;
    double predict(std::span<const double> row) const { return leaf_for(row).value; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t depth() const;

private:
    std::vector<TreeNode> nodes_;
};

struct ClassificationTreeParams {
    std::size_t mtry = 0;      // features tried per node; 0 means all
    std::size_t min_leaf = 1;  // minimum rows per child
    std::size_t max_depth = 0; // 0 means unlimited
};

// Grows a Gini tree on `sample` (row indices, repeats allowed). Leaves carry
// the majority class, lowest index on ties. When `importance` is non-null the
// impurity decrease of every split, divided by the sample size, is added to
// importance[feature].
DecisionTree grow_classification_tree(const BinnedMatrix& x, std::span<const int> labels, int n_classes,
                                      std::span<const std::uint32_t> sample, const ClassificationTreeParams& params,
                                      Rng& rng, std::vector<double>* importance = nullptr);

struct GradientTreeParams {
    std::size_t max_depth = 4;
    double lambda = 1.0;            // L2 penalty on leaf weights
    double gamma = 0.0;             // minimum loss reduction to split
    double min_child_weight = 1.0;  // minimum hessian sum per child
};

// Second-order regression tree: split gain
//   1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma
// and leaf weight -G/(H+lambda) scaled by `shrinkage`.
DecisionTree grow_gradient_tree(const BinnedMatrix& x, std::span<const double> grad, std::span<const double> hess,
                                const GradientTreeParams& params, double shrinkage);

struct ForestParams {
    std::size_t n_trees = 500;
    std::size_t mtry = 0;  // 0 means floor(sqrt(p))
    std::size_t min_leaf = 1;
    std::size_t max_depth = 0;
    bool bootstrap = true;
};

class RandomForest {
public:
    RandomForest() = default;
    RandomForest(std::vector<DecisionTree> trees, int n_classes, std::size_t n_features)
        : trees_(std::move(trees)), n_classes_(n_classes), n_features_(n_features) {}

    // Trees are grown independently, each from its own seed derived from
    // (seed, tree index). With `track_importance`, per-tree impurity
    // importances are kept for every feature.
    static RandomForest fit(const FeatureMatrix& train, const ForestParams& params, std::uint64_t seed,
                            bool track_importance = false);

    // Vote shares of the trees' leaf classes.
    std::vector<double> predict_scores(std::span<const double> row) const;

    const std::vector<DecisionTree>& trees() const { return trees_; }
    int n_classes() const { return n_classes_; }
    std::size_t n_features() const { return n_features_; }
    // Rows never drawn by each tree's bootstrap.
    const std::vector<std::vector<std::uint32_t>>& oob_rows() const { return oob_; }
    // Distinct rows drawn by each tree, as a fraction of the training size.
    const std::vector<double>& bootstrap_coverage() const { return coverage_; }
    // tree x feature impurity decrease; empty unless tracked.
    const std::vector<std::vector<double>>& tree_importance() const { return importance_; }
    double oob_error(const FeatureMatrix& train) const;

private:
    std::vector<DecisionTree> trees_;
    int n_classes_ = 0;
    std::size_t n_features_ = 0;
    std::vector<std::vector<std::uint32_t>> oob_;
    std::vector<double> coverage_;
    std::vector<std::vector<double>> importance_;
};

std::size_t default_mtry(std::size_t n_features);

}  // namespace bcbench
