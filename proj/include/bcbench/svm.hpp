#pragma once

#include "bcbench/datamodel.hpp"
#include "bcbench/standardize.hpp"

#include <span>
#include <vector>

namespace bcbench {

struct SvmParams {
    double c = 1.0;
    double gamma = 0.0;  // RBF width; 0 means 1/p
    double tolerance = 1e-3;
    std::size_t max_iter = 0;  // 0 means max(10^7, 100 l)
};

// Dual solution of one soft-margin problem, kept as support vectors only.
struct BinarySvm {
    int positive = 0;  // class voted for when the decision is >= 0
    int negative = 1;
    std::vector<std::vector<double>> support;  // standardized rows
    std::vector<double> coef;                  // alpha_i * y_i
    double rho = 0.0;
    std::size_t iterations = 0;
};

struct SvmSolution {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
};

// Second-order working-set SMO for
//   min 1/2 a'Qa - e'a  s.t. y'a = 0, 0 <= a <= C,  Q_ij = y_i y_j K_ij.
// `kernel` is the full l x l kernel matrix, row-major.
SvmSolution solve_svm_dual(std::span<const double> kernel, std::span<const int> y, double c, double tolerance,
                           std::size_t max_iter);

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

// One-vs-one RBF classifier on z-scored inputs.
//
// Scores: each pairwise machine gives a vote and a logistic confidence
// sigma(f) toward the winner side. Class c's raw score is
//   votes_c + mean over its opponents of sigma(f oriented toward c)
// which lies in [votes_c, votes_c + 1), so the argmax never disagrees with
// the vote count and only breaks vote ties. Raw scores are normalized to sum
// to 1.
class SvmModel {
public:
    static SvmModel fit(const FeatureMatrix& train, const SvmParams& params);

    std::vector<double> predict_scores(std::span<const double> row) const;
    // Decision value of each machine for a raw (unscaled) row.
    std::vector<double> decisions(std::span<const double> row) const;

    int n_classes = 0;
    double gamma = 0.0;
    Standardizer scaler;
    std::vector<BinarySvm> machines;
};

}  // namespace bcbench
