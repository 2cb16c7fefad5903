#include "bcbench/stats.hpp"

#include "bcbench/distributions.hpp"
#include "bcbench/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace bcbench {

MeanSd aggregate_mean_sd(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("mean of an empty set");
    MeanSd out;
    out.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(out.n);
    if (out.n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
    }
    return out;
}

namespace {

void check_groups(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw DegenerateAnova("one-way ANOVA needs at least two groups");
    for (const auto& g : groups) {
        if (g.size() < 2) throw DegenerateAnova("every ANOVA group needs at least two values");
        for (double v : g)
            if (!std::isfinite(v)) throw NumericError("non-finite value in ANOVA group");
    }
}

}  // namespace

OneWayResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    check_groups(groups);
    std::size_t n = 0;
    double total = 0.0;
    for (const auto& g : groups) {
        n += g.size();
        for (double v : g) total += v;
    }
    const double grand = total / static_cast<double>(n);
    OneWayResult r;
    for (const auto& g : groups) {
        const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        r.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) r.ss_within += (v - m) * (v - m);
    }
    r.df_between = groups.size() - 1;
    r.df_within = n - groups.size();
    if (r.ss_within == 0.0 && r.ss_between == 0.0) throw DegenerateAnova("all values identical");
    if (r.ss_within == 0.0) {
        r.f = std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.f = (r.ss_between / static_cast<double>(r.df_between)) / (r.ss_within / static_cast<double>(r.df_within));
    r.p = f_upper_tail(r.f, static_cast<double>(r.df_between), static_cast<double>(r.df_within));
    return r;
}

BonferroniResult bonferroni_posthoc(const std::vector<std::vector<double>>& groups, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const OneWayResult anova = one_way_anova(groups);
    const double mse = anova.ss_within / static_cast<double>(anova.df_within);
    const std::size_t g = groups.size();
    BonferroniResult out;
    out.alpha = alpha;
    out.comparisons = g * (g - 1) / 2;
    out.threshold = alpha / static_cast<double>(out.comparisons);
    std::vector<double> means;
    for (const auto& grp : groups)
        means.push_back(std::accumulate(grp.begin(), grp.end(), 0.0) / static_cast<double>(grp.size()));
    for (std::size_t a = 0; a < g; ++a)
        for (std::size_t b = a + 1; b < g; ++b) {
            PairwiseComparison c;
            c.a = a;
            c.b = b;
            c.mean_difference = means[a] - means[b];
            const double se = std::sqrt(mse * (1.0 / static_cast<double>(groups[a].size()) +
                                               1.0 / static_cast<double>(groups[b].size())));
            if (se == 0.0) {
                c.t = c.mean_difference == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                                      c.mean_difference);
            } else {
                c.t = c.mean_difference / se;
            }
            c.p_raw = c.t == 0.0 ? 1.0 : t_two_sided(c.t, static_cast<double>(anova.df_within));
            c.p_adjusted = std::min(1.0, c.p_raw * static_cast<double>(out.comparisons));
            c.significant = c.p_raw < out.threshold;
            out.pairs.push_back(c);
        }
    return out;
}

double partial_eta_squared(double ss_effect, double ss_error) {
    if (ss_effect < 0.0 || ss_error < 0.0) throw NumericError("sums of squares must be non-negative");
    if (ss_effect == 0.0 && ss_error == 0.0) throw DegenerateEffect("effect and error sums of squares are both zero");
    return ss_effect / (ss_effect + ss_error);
}

AnovaTable factorial_anova(const FactorialDesign& d) {
    const std::size_t k = d.factors.size();
    if (k == 0 || k != d.levels.size()) throw SchemaError("factor names and level counts differ");
    if (k > 16) throw SchemaError("too many factors");
    if (d.observations.empty()) throw EmptyInput("design has no observations");
    for (auto l : d.levels)
        if (l < 2) throw UnbalancedDesign("every factor needs at least two levels");

    std::size_t n_cells = 1;
    for (auto l : d.levels) n_cells *= l;
    auto cell_index = [&](const std::vector<std::size_t>& cell, unsigned mask) {
        std::size_t idx = 0;
        for (std::size_t f = 0; f < k; ++f) {
            if (!(mask & (1u << f))) continue;
            idx = idx * d.levels[f] + cell[f];
        }
        return idx;
    };

    const std::size_t N = d.observations.size();
    double grand = 0.0;
    for (const auto& o : d.observations) {
        if (o.cell.size() != k) throw SchemaError("observation has the wrong number of factor levels");
        for (std::size_t f = 0; f < k; ++f)
            if (o.cell[f] >= d.levels[f]) throw SchemaError("factor level out of range");
        if (!std::isfinite(o.response)) throw NumericError("non-finite response");
        grand += o.response;
    }
    grand /= static_cast<double>(N);

    const unsigned full = (1u << k) - 1;
    std::vector<std::size_t> counts(n_cells, 0);
    for (const auto& o : d.observations) ++counts[cell_index(o.cell, full)];
    const std::size_t reps = counts[0];
    for (auto c : counts)
        if (c != reps) throw UnbalancedDesign("cells have unequal replicate counts");
    if (reps < 2) throw UnbalancedDesign("every cell needs at least two replicates");

    // Q[mask] = sum over marginal cells of n_cell * mean_cell^2, on centered
    // responses. Effect SS follows by inclusion-exclusion over subsets.
    std::vector<double> Q(std::size_t{1} << k, 0.0);
    for (unsigned mask = 1; mask <= full; ++mask) {
        std::size_t cells = 1;
        for (std::size_t f = 0; f < k; ++f)
            if (mask & (1u << f)) cells *= d.levels[f];
        std::vector<double> sums(cells, 0.0);
        for (const auto& o : d.observations) sums[cell_index(o.cell, mask)] += o.response - grand;
        const double per_cell = static_cast<double>(N / cells);
        double q = 0.0;
        for (double s : sums) q += s * s / per_cell;
        Q[mask] = q;
    }

    AnovaTable t;
    t.replicates = reps;
    t.df_total = N - 1;
    for (const auto& o : d.observations) t.ss_total += (o.response - grand) * (o.response - grand);

    std::vector<double> cell_sum(n_cells, 0.0);
    for (const auto& o : d.observations) cell_sum[cell_index(o.cell, full)] += o.response;
    double ss_error = 0.0;
    for (const auto& o : d.observations) {
        const double m = cell_sum[cell_index(o.cell, full)] / static_cast<double>(reps);
        ss_error += (o.response - m) * (o.response - m);
    }
    t.error.effect = "Error";
    t.error.df = N - n_cells;
    t.error.ss = ss_error;
    t.error.ms = ss_error / static_cast<double>(t.error.df);
    t.error.f = std::numeric_limits<double>::quiet_NaN();
    t.error.p = std::numeric_limits<double>::quiet_NaN();
    t.error.partial_eta_sq = std::numeric_limits<double>::quiet_NaN();

    std::vector<unsigned> masks;
    for (unsigned mask = 1; mask <= full; ++mask) masks.push_back(mask);
    auto members = [k](unsigned mask) {
        std::vector<std::size_t> f;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (1u << i)) f.push_back(i);
        return f;
    };
    std::stable_sort(masks.begin(), masks.end(), [&](unsigned a, unsigned b) {
        const auto pa = std::popcount(a), pb = std::popcount(b);
        if (pa != pb) return pa < pb;
        return members(a) < members(b);
    });

    for (unsigned mask : masks) {
        AnovaRow row;
        row.factors = members(mask);
        for (std::size_t i = 0; i < row.factors.size(); ++i)
            row.effect += (i ? " * " : "") + d.factors[row.factors[i]];
        row.df = 1;
        for (auto f : row.factors) row.df *= d.levels[f] - 1;
        double ss = 0.0;
        for (unsigned sub = mask;; sub = (sub - 1) & mask) {
            const int sign = (std::popcount(mask) - std::popcount(sub)) % 2 == 0 ? 1 : -1;
            ss += sign * Q[sub];
            if (sub == 0) break;
        }
        // Round-off can leave a tiny negative value for a null effect.
        row.ss = std::max(0.0, ss);
        row.ms = row.ss / static_cast<double>(row.df);
        if (row.ss == 0.0) {
            row.f = 0.0;
            row.p = 1.0;
            row.partial_eta_sq = 0.0;
        } else if (ss_error == 0.0) {
            row.f = std::numeric_limits<double>::infinity();
            row.p = 0.0;
            row.partial_eta_sq = 1.0;
        } else {
            row.f = row.ms / t.error.ms;
            row.p = f_upper_tail(row.f, static_cast<double>(row.df), static_cast<double>(t.error.df));
            row.partial_eta_sq = partial_eta_squared(row.ss, ss_error);
        }
        t.effects.push_back(std::move(row));
    }
    return t;
}

std::string significance_stars(double p) {
    if (std::isnan(p)) return "";
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::string render_anova_table(const AnovaTable& table, const std::string& title) {
    std::size_t width = std::string("Source").size();
    for (const auto& r : table.effects) width = std::max(width, r.effect.size());
    char buf[256];
    std::ostringstream out;
    out << title << "\n";
    std::snprintf(buf, sizeof buf, "%-*s %5s %14s %14s %12s %10s %8s\n", static_cast<int>(width), "Source", "df", "SS",
                  "MS", "F", "p", "eta2_p");
    out << buf << std::string(width + 70, '-') << "\n";
    for (const auto& r : table.effects) {
        std::snprintf(buf, sizeof buf, "%-*s %5zu %14.4f %14.4f %9.2f%-3s %10.4g %8.2f\n", static_cast<int>(width),
                      r.effect.c_str(), r.df, r.ss, r.ms, r.f, significance_stars(r.p).c_str(), r.p, r.partial_eta_sq);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%-*s %5zu %14.4f %14.4f\n", static_cast<int>(width), "Error", table.error.df,
                  table.error.ss, table.error.ms);
    out << buf;
    std::snprintf(buf, sizeof buf, "%-*s %5zu %14.4f\n", static_cast<int>(width), "Total (corrected)", table.df_total,
                  table.ss_total);
    out << buf;
    out << "*** p < .001, ** p < .01, * p < .05; eta2_p = partial eta squared\n";
    return out.str();
}

}  // namespace bcbench
