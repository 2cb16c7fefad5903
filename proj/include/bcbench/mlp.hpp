#pragma once

#include "bcbench/datamodel.hpp"
#include "bcbench/random.hpp"
#include "bcbench/standardize.hpp"

#include <span>
#include <vector>

namespace bcbench {

struct NnParams {
    std::size_t hidden = 32;
    double learning_rate = 0.01;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
};

// One tanh hidden layer, softmax output, mean cross-entropy loss.
// Parameters are one flat vector laid out as W1 (hidden x inputs, row-major),
// b1, W2 (classes x hidden), b2.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::size_t inputs, std::size_t hidden, std::size_t classes);

    // Glorot-uniform weights, zero biases.
    void initialize(Rng& rng);

    std::size_t inputs() const { return inputs_; }
    std::size_t hidden() const { return hidden_; }
    std::size_t classes() const { return classes_; }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    // Class probabilities for one input row.
    std::vector<double> forward(std::span<const double> x) const;

    // Mean cross-entropy over `rows` rows of `x` (row-major). When `grad` is
    // non-null it receives the analytic gradient, same layout as parameters.
    double loss_and_gradient(std::span<const double> x, std::span<const int> y, std::vector<double>* grad) const;

private:
    std::size_t inputs_ = 0, hidden_ = 0, classes_ = 0;
    std::vector<double> params_;

    std::size_t w1() const { return 0; }
    std::size_t b1() const { return hidden_ * inputs_; }
    std::size_t w2() const { return b1() + hidden_; }
    std::size_t b2() const { return w2() + classes_ * hidden_; }
};

class MlpModel {
public:
    // Mini-batch gradient descent; batch order reshuffled each epoch from `seed`.
    static MlpModel fit(const FeatureMatrix& train, const NnParams& params, std::uint64_t seed);

    std::vector<double> predict_scores(std::span<const double> row) const;

    Standardizer scaler;
    Mlp net;
};

}  // namespace bcbench
