#include "bcbench/svm.hpp"

#include "bcbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bcbench {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-gamma * d2);
}

namespace {
constexpr double kTau = 1e-12;
}

SvmSolution solve_svm_dual(std::span<const double> kernel, std::span<const int> y, double c, double tolerance,
                           std::size_t max_iter) {
    const std::size_t l = y.size();
    if (kernel.size() != l * l) throw SchemaError("kernel matrix size does not match labels");
    if (max_iter == 0) max_iter = std::max<std::size_t>(10000000, 100 * l);
    auto Q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * kernel[i * l + j]; };
    auto upper = [&](const std::vector<double>& a, std::size_t t) { return a[t] >= c; };
    auto lower = [&](const std::vector<double>& a, std::size_t t) { return a[t] <= 0.0; };

    SvmSolution sol;
    auto& alpha = sol.alpha;
    alpha.assign(l, 0.0);
    std::vector<double> G(l, -1.0);

    for (; sol.iterations < max_iter; ++sol.iterations) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t gi = -1;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] == 1) {
                if (!upper(alpha, t) && -G[t] >= gmax) gmax = -G[t], gi = static_cast<std::ptrdiff_t>(t);
            } else if (!lower(alpha, t) && G[t] >= gmax) {
                gmax = G[t], gi = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (gi < 0) break;
        const auto i = static_cast<std::size_t>(gi);
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        std::ptrdiff_t gj = -1;
        for (std::size_t t = 0; t < l; ++t) {
            double grad_diff;
            if (y[t] == 1) {
                if (lower(alpha, t)) continue;
                grad_diff = gmax + G[t];
                gmax2 = std::max(gmax2, G[t]);
            } else {
                if (upper(alpha, t)) continue;
                grad_diff = gmax - G[t];
                gmax2 = std::max(gmax2, -G[t]);
            }
            if (grad_diff <= 0.0) continue;
            double quad = kernel[i * l + i] + kernel[t * l + t] - 2.0 * y[i] * Q(i, t);
            if (quad <= 0.0) quad = kTau;
            const double obj = -(grad_diff * grad_diff) / quad;
            if (obj <= best_obj) best_obj = obj, gj = static_cast<std::ptrdiff_t>(t);
        }
        if (gmax + gmax2 < tolerance || gj < 0) break;
        const auto j = static_cast<std::size_t>(gj);

        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = kernel[i * l + i] + kernel[j * l + j] + 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = diff;
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0, alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) alpha[i] = c, alpha[j] = c - diff;
            } else if (alpha[j] > c) {
                alpha[j] = c, alpha[i] = c + diff;
            }
        } else {
            double quad = kernel[i * l + i] + kernel[j * l + j] - 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) alpha[i] = c, alpha[j] = sum - c;
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0, alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) alpha[j] = c, alpha[i] = sum - c;
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0, alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < l; ++t) G[t] += Q(i, t) * di + Q(j, t) * dj;
    }

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = y[t] * G[t];
        if (upper(alpha, t)) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(alpha, t)) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    return sol;
}

SvmModel SvmModel::fit(const FeatureMatrix& train, const SvmParams& params) {
    SvmModel model;
    model.n_classes = train.n_classes();
    model.gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(1, train.cols()));
    model.scaler = Standardizer::fit(train);
    const std::size_t p = train.cols();
    const auto z = model.scaler.apply_all(train);
    const auto& labels = train.labels();

    for (int a = 0; a < model.n_classes; ++a) {
        for (int b = a + 1; b < model.n_classes; ++b) {
            std::vector<std::size_t> rows;
            std::vector<int> y;
            for (std::size_t r = 0; r < train.rows(); ++r)
                if (labels[r] == a || labels[r] == b) {
                    rows.push_back(r);
                    y.push_back(labels[r] == a ? 1 : -1);
                }
            const bool has_a = std::find(y.begin(), y.end(), 1) != y.end();
            const bool has_b = std::find(y.begin(), y.end(), -1) != y.end();
            if (!has_a || !has_b) continue;  // class absent from this training set
            const std::size_t l = rows.size();
            std::vector<double> k(l * l);
            for (std::size_t i = 0; i < l; ++i) {
                const std::span<const double> xi(z.data() + rows[i] * p, p);
                k[i * l + i] = 1.0;
                for (std::size_t j = i + 1; j < l; ++j)
                    k[i * l + j] = k[j * l + i] = rbf_kernel(xi, {z.data() + rows[j] * p, p}, model.gamma);
            }
            const auto sol = solve_svm_dual(k, y, params.c, params.tolerance, params.max_iter);
            BinarySvm m;
            m.positive = a;
            m.negative = b;
            m.rho = sol.rho;
            m.iterations = sol.iterations;
            for (std::size_t i = 0; i < l; ++i)
                if (sol.alpha[i] > 0.0) {
                    m.support.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(rows[i] * p),
                                           z.begin() + static_cast<std::ptrdiff_t>((rows[i] + 1) * p));
                    m.coef.push_back(sol.alpha[i] * y[i]);
                }
            model.machines.push_back(std::move(m));
        }
    }
    return model;
}

std::vector<double> SvmModel::decisions(std::span<const double> row) const {
    const auto x = scaler.apply(row);
    std::vector<double> out;
    out.reserve(machines.size());
    for (const auto& m : machines) {
        double f = -m.rho;
        for (std::size_t i = 0; i < m.support.size(); ++i) f += m.coef[i] * rbf_kernel(m.support[i], x, gamma);
        out.push_back(f);
    }
    return out;
}

std::vector<double> SvmModel::predict_scores(std::span<const double> row) const {
    const auto C = static_cast<std::size_t>(n_classes);
    std::vector<double> votes(C, 0.0), conf(C, 0.0), opponents(C, 0.0);
    const auto f = decisions(row);
    for (std::size_t k = 0; k < machines.size(); ++k) {
        const auto a = static_cast<std::size_t>(machines[k].positive);
        const auto b = static_cast<std::size_t>(machines[k].negative);
        votes[f[k] >= 0.0 ? a : b] += 1.0;
        const double s = 1.0 / (1.0 + std::exp(-f[k]));
        conf[a] += s;
        conf[b] += 1.0 - s;
        opponents[a] += 1.0;
        opponents[b] += 1.0;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        votes[c] += opponents[c] > 0.0 ? conf[c] / opponents[c] : 0.0;
        total += votes[c];
    }
    // Cannot happen with at least one machine; keeps the vector a distribution.
    if (total <= 0.0) return std::vector<double>(C, 1.0 / static_cast<double>(C));
    for (auto& v : votes) v /= total;
    return votes;
}

}  // namespace bcbench
