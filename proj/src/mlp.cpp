#include "bcbench/mlp.hpp"

#include "bcbench/error.hpp"
#include "bcbench/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bcbench {

namespace {

// Four independent partial sums let the compiler vectorize the reduction.
double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

}  // namespace

Mlp::Mlp(std::size_t inputs, std::size_t hidden, std::size_t classes)
    : inputs_(inputs), hidden_(hidden), classes_(classes),
      params_(hidden * inputs + hidden + classes * hidden + classes, 0.0) {}

void Mlp::initialize(Rng& rng) {
    std::fill(params_.begin(), params_.end(), 0.0);
    const double l1 = std::sqrt(6.0 / static_cast<double>(inputs_ + hidden_));
    const double l2 = std::sqrt(6.0 / static_cast<double>(hidden_ + classes_));
    for (std::size_t i = 0; i < hidden_ * inputs_; ++i) params_[w1() + i] = rng.uniform(-l1, l1);
    for (std::size_t i = 0; i < classes_ * hidden_; ++i) params_[w2() + i] = rng.uniform(-l2, l2);
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    std::vector<double> h(hidden_);
    for (std::size_t j = 0; j < hidden_; ++j) {
        const double* w = params_.data() + w1() + j * inputs_;
        h[j] = std::tanh(params_[b1() + j] + dot(w, x.data(), inputs_));
    }
    std::vector<double> z(classes_);
    for (std::size_t c = 0; c < classes_; ++c) {
        const double* w = params_.data() + w2() + c * hidden_;
        z[c] = params_[b2() + c] + dot(w, h.data(), hidden_);
    }
    softmax_inplace(z);
    return z;
}

double Mlp::loss_and_gradient(std::span<const double> x, std::span<const int> y, std::vector<double>* grad) const {
    const std::size_t m = y.size();
    if (m == 0) throw EmptyInput("empty batch");
    if (grad) grad->assign(params_.size(), 0.0);
    std::vector<double> h(hidden_), z(classes_), dh(hidden_);
    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) {
        const double* xr = x.data() + r * inputs_;
        for (std::size_t j = 0; j < hidden_; ++j) {
            const double* w = params_.data() + w1() + j * inputs_;
            h[j] = std::tanh(params_[b1() + j] + dot(w, xr, inputs_));
        }
        for (std::size_t c = 0; c < classes_; ++c) {
            const double* w = params_.data() + w2() + c * hidden_;
            z[c] = params_[b2() + c] + dot(w, h.data(), hidden_);
        }
        softmax_inplace(z);
        const auto t = static_cast<std::size_t>(y[r]);
        loss -= std::log(std::max(z[t], 1e-300)) * inv;
        if (!grad) continue;

        auto& g = *grad;
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t c = 0; c < classes_; ++c) {
            const double dz = (z[c] - (c == t ? 1.0 : 0.0)) * inv;
            g[b2() + c] += dz;
            const double* w = params_.data() + w2() + c * hidden_;
            double* gw = g.data() + w2() + c * hidden_;
            for (std::size_t j = 0; j < hidden_; ++j) {
                gw[j] += dz * h[j];
                dh[j] += dz * w[j];
            }
        }
        for (std::size_t j = 0; j < hidden_; ++j) {
            const double da = dh[j] * (1.0 - h[j] * h[j]);
            g[b1() + j] += da;
            double* gw = g.data() + w1() + j * inputs_;
            for (std::size_t i = 0; i < inputs_; ++i) gw[i] += da * xr[i];
        }
    }
    return loss;
}

MlpModel MlpModel::fit(const FeatureMatrix& train, const NnParams& params, std::uint64_t seed) {
    const std::size_t n = train.rows(), p = train.cols();
    if (n == 0) throw EmptyInput("network needs training rows");
    MlpModel model;
    model.scaler = Standardizer::fit(train);
    model.net = Mlp(p, params.hidden, static_cast<std::size_t>(train.n_classes()));
    Rng rng(seed);
    model.net.initialize(rng);

    const auto z = model.scaler.apply_all(train);
    const auto& labels = train.labels();
    const std::size_t batch = std::max<std::size_t>(1, params.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> bx;
    std::vector<int> by;
    std::vector<double> grad;
    auto& w = model.net.parameters();
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            bx.clear();
            by.clear();
            for (std::size_t k = start; k < end; ++k) {
                bx.insert(bx.end(), z.begin() + static_cast<std::ptrdiff_t>(order[k] * p),
                          z.begin() + static_cast<std::ptrdiff_t>((order[k] + 1) * p));
                by.push_back(labels[order[k]]);
            }
            model.net.loss_and_gradient(bx, by, &grad);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= params.learning_rate * grad[i];
        }
    }
    return model;
}

std::vector<double> MlpModel::predict_scores(std::span<const double> row) const {
    return net.forward(scaler.apply(row));
}

}  // namespace bcbench
