// Reference implementations used by the tests. They favor the most literal
// form of each definition over speed and share no code with the library.
#pragma once

#include "bcbench/impute.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Exhaustive k-NN mean imputation: z-scored Euclidean distance over the
// dimensions both rows observe, scaled by all/shared dimensions; every
// candidate is ranked, ties by row index.
inline bcbench::DenseMatrix knn_impute(const bcbench::DenseMatrix& m, std::size_t k) {
    auto nan = [](double v) { return v != v; };
    std::vector<double> sd(m.cols, 1.0);
    for (std::size_t c = 0; c < m.cols; ++c) {
        std::vector<double> v;
        for (std::size_t r = 0; r < m.rows; ++r)
            if (!nan(m.values[r * m.cols + c])) v.push_back(m.values[r * m.cols + c]);
        if (v.size() < 2) continue;
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        if (ss > 0.0) sd[c] = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    auto distance = [&](std::size_t a, std::size_t b) {
        double sum = 0.0;
        std::size_t shared = 0;
        for (std::size_t c = 0; c < m.cols; ++c) {
            const double x = m.values[a * m.cols + c], y = m.values[b * m.cols + c];
            if (nan(x) || nan(y)) continue;
            sum += std::pow((x - y) / sd[c], 2);
            ++shared;
        }
        return shared == 0 ? std::numeric_limits<double>::infinity()
                           : std::sqrt(sum * static_cast<double>(m.cols) / static_cast<double>(shared));
    };
    bcbench::DenseMatrix out = m;
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (!nan(m.values[r * m.cols + c])) continue;
            std::vector<std::pair<double, std::size_t>> cand;
            for (std::size_t o = 0; o < m.rows; ++o)
                if (o != r && !nan(m.values[o * m.cols + c])) cand.emplace_back(distance(r, o), o);
            std::sort(cand.begin(), cand.end());
            double sum = 0.0;
            const std::size_t take = std::min(k, cand.size());
            for (std::size_t i = 0; i < take; ++i) sum += m.values[cand[i].second * m.cols + c];
            out.values[r * m.cols + c] = sum / static_cast<double>(take);
        }
    return out;
}

// AUC as the share of (positive, negative) pairs ranked correctly, ties 1/2.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& positive) {
    double good = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (!positive[i] || positive[j]) continue;
            ++pairs;
            good += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
        }
    return good / static_cast<double>(pairs);
}

// Macro one-vs-rest AUC over classes having both positives and negatives.
inline double ovr_auc(const std::vector<std::vector<double>>& scores, const std::vector<int>& labels,
                      std::size_t classes) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> s;
        std::vector<std::uint8_t> pos;
        std::size_t npos = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            s.push_back(scores[i][c]);
            pos.push_back(static_cast<std::size_t>(labels[i]) == c);
            npos += pos.back();
        }
        if (npos == 0 || npos == labels.size()) continue;
        sum += pairwise_auc(s, pos);
        ++used;
    }
    return sum / static_cast<double>(used);
}

// Exact rational arithmetic for small integer-valued ANOVA checks.
struct Rational {
    std::int64_t num = 0, den = 1;
    Rational(std::int64_t n = 0, std::int64_t d = 1) : num(n), den(d) { normalize(); }
    void normalize() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const auto g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
    friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
    friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
    friend Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// One-way ANOVA F statistic on integer data, exactly.
inline Rational one_way_f(const std::vector<std::vector<std::int64_t>>& groups) {
    Rational grand;
    std::int64_t n = 0;
    for (const auto& g : groups)
        for (auto v : g) {
            grand = grand + Rational(v);
            ++n;
        }
    grand = grand / Rational(n);
    Rational ssb, ssw;
    for (const auto& g : groups) {
        Rational mean;
        for (auto v : g) mean = mean + Rational(v);
        mean = mean / Rational(static_cast<std::int64_t>(g.size()));
        ssb = ssb + Rational(static_cast<std::int64_t>(g.size())) * (mean - grand) * (mean - grand);
        for (auto v : g) ssw = ssw + (Rational(v) - mean) * (Rational(v) - mean);
    }
    const auto k = static_cast<std::int64_t>(groups.size());
    return (ssb / Rational(k - 1)) / (ssw / Rational(n - k));
}

// Cohen's kappa straight from the contingency table.
inline double kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, double> ca, cb;
    double agree = 0.0;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1.0;
        cb[b[i]] += 1.0;
        agree += a[i] == b[i];
    }
    double pe = 0.0;
    for (const auto& [k, v] : ca) pe += (v / n) * (cb.count(k) ? cb[k] / n : 0.0);
    return (agree / n - pe) / (1.0 - pe);
}

}  // namespace oracle
