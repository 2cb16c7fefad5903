#pragma once

#include "bcbench/forest.hpp"

#include <span>
#include <vector>

namespace bcbench {

struct GbtParams {
    std::size_t rounds = 200;
    std::size_t max_depth = 4;
    double learning_rate = 0.1;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
};

// Softmax boosting: each round grows one second-order regression tree per
// class on the gradients p - y and hessians p(1 - p) of the cross-entropy.
class GbtModel {
public:
    GbtModel() = default;
    GbtModel(std::vector<double> base, std::vector<std::vector<DecisionTree>> rounds)
        : base_(std::move(base)), rounds_(std::move(rounds)) {}

    static GbtModel fit(const FeatureMatrix& train, const GbtParams& params);

    std::vector<double> margins(std::span<const double> row) const;
    std::vector<double> predict_scores(std::span<const double> row) const;

    int n_classes() const { return static_cast<int>(base_.size()); }
    // Log class priors the margins start from.
    const std::vector<double>& base() const { return base_; }
    // rounds x classes
    const std::vector<std::vector<DecisionTree>>& rounds() const { return rounds_; }

private:
    std::vector<double> base_;
    std::vector<std::vector<DecisionTree>> rounds_;
};

// Numerically stable softmax, in place.
void softmax_inplace(std::span<double> z);

}  // namespace bcbench
