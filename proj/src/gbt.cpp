#include "bcbench/gbt.hpp"

#include "bcbench/error.hpp"

#include <algorithm>
#include <cmath>

namespace bcbench {

void softmax_inplace(std::span<double> z) {
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - top);
        sum += v;
    }
    for (auto& v : z) v /= sum;
}

GbtModel GbtModel::fit(const FeatureMatrix& train, const GbtParams& params) {
    const std::size_t n = train.rows();
    if (n == 0) throw EmptyInput("boosting needs training rows");
    const auto C = static_cast<std::size_t>(train.n_classes());
    const auto& y = train.labels();

    // Classes missing from the fold get a tiny prior instead of log(0).
    std::vector<double> base(C, 0.0);
    for (int v : y) base[static_cast<std::size_t>(v)] += 1.0;
    for (auto& b : base) b = std::log(std::max(b / static_cast<double>(n), 1e-6));

    const BinnedMatrix x(train);
    const GradientTreeParams tp{params.max_depth, params.lambda, params.gamma, params.min_child_weight};
    std::vector<double> f(n * C);
    for (std::size_t i = 0; i < n; ++i) std::copy(base.begin(), base.end(), f.begin() + static_cast<std::ptrdiff_t>(i * C));

    std::vector<double> prob(n * C), g(n), h(n);
    std::vector<std::vector<DecisionTree>> rounds;
    rounds.reserve(params.rounds);
    for (std::size_t round = 0; round < params.rounds; ++round) {
        prob = f;
        for (std::size_t i = 0; i < n; ++i) softmax_inplace(std::span<double>(prob.data() + i * C, C));
        std::vector<DecisionTree> trees;
        trees.reserve(C);
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = prob[i * C + c];
                g[i] = p - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0);
                h[i] = std::max(p * (1.0 - p), 1e-16);
            }
            trees.push_back(grow_gradient_tree(x, g, h, tp, params.learning_rate));
            for (std::size_t i = 0; i < n; ++i) f[i * C + c] += trees.back().predict(train.row(i));
        }
        rounds.push_back(std::move(trees));
    }
    return GbtModel(std::move(base), std::move(rounds));
}

std::vector<double> GbtModel::margins(std::span<const double> row) const {
    std::vector<double> z = base_;
    for (const auto& trees : rounds_)
        for (std::size_t c = 0; c < trees.size(); ++c) z[c] += trees[c].predict(row);
    return z;
}

std::vector<double> GbtModel::predict_scores(std::span<const double> row) const {
    auto z = margins(row);
    softmax_inplace(z);
    return z;
}

}  // namespace bcbench
