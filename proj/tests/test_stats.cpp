#include "bcbench/distributions.hpp"
#include "bcbench/error.hpp"
#include "bcbench/random.hpp"
#include "bcbench/stats.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bcbench;

namespace {

FactorialDesign random_design(Rng& rng, std::vector<std::size_t> levels, std::size_t reps) {
    FactorialDesign d;
    for (std::size_t i = 0; i < levels.size(); ++i) d.factors.push_back("F" + std::to_string(i));
    d.levels = levels;
    std::vector<std::size_t> cell(levels.size(), 0);
    while (true) {
        for (std::size_t r = 0; r < reps; ++r) {
            double effect = 0.0;
            for (std::size_t i = 0; i < cell.size(); ++i) effect += static_cast<double>(cell[i]) * (i + 1);
            d.observations.push_back({cell, 50.0 + effect + rng.normal(0.0, 2.0), "r" + std::to_string(r)});
        }
        std::size_t i = 0;
        while (i < cell.size() && ++cell[i] == levels[i]) cell[i++] = 0;
        if (i == cell.size()) break;
    }
    return d;
}

}  // namespace

TEST_CASE("mean and sample SD") {
    const std::vector<double> xgb{69.0, 67.6, 59.1, 64.4};
    const auto a = aggregate_mean_sd(xgb);
    CHECK(a.mean == doctest::Approx(65.025));
    CHECK(std::abs(a.sd - 4.39) < 0.01);
    CHECK(a.n == 4);
    const std::vector<double> one{3.0};
    CHECK(aggregate_mean_sd(one).sd == 0.0);
    CHECK_THROWS_AS(aggregate_mean_sd(std::vector<double>{}), EmptyInput);
}

TEST_CASE("one-way ANOVA matches exact rational arithmetic") {
    const std::vector<std::vector<double>> g{{1, 2, 3}, {2, 3, 4}, {3, 4, 5}};
    const auto r = one_way_anova(g);
    CHECK(oracle::one_way_f({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}}) == oracle::Rational(3));
    CHECK(r.f == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(r.df_between == 2);
    CHECK(r.df_within == 6);
    CHECK(r.p == doctest::Approx(f_upper_tail(3.0, 2, 6)));

    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        std::vector<std::vector<std::int64_t>> ig(2 + rng.index(4));
        std::vector<std::vector<double>> dg;
        for (auto& grp : ig) {
            const std::size_t n = 2 + rng.index(6);
            for (std::size_t i = 0; i < n; ++i) grp.push_back(static_cast<std::int64_t>(rng.index(20)));
            dg.emplace_back(grp.begin(), grp.end());
        }
        const auto want = oracle::one_way_f(ig);
        if (want.den == 0) continue;
        try {
            CHECK(one_way_anova(dg).f == doctest::Approx(want.value()).epsilon(1e-12));
        } catch (const DegenerateAnova&) {
            CHECK(want.num == 0);
        }
    }
}

TEST_CASE("one-way ANOVA degenerate inputs") {
    CHECK_THROWS_AS(one_way_anova({{1, 2}}), DegenerateAnova);
    CHECK_THROWS_AS(one_way_anova({{1, 2}, {3}}), DegenerateAnova);
    CHECK_THROWS_AS(one_way_anova({{2, 2}, {2, 2}}), DegenerateAnova);
    const auto r = one_way_anova({{1, 1}, {2, 2}});
    CHECK(std::isinf(r.f));
    CHECK(r.p == 0.0);
}

TEST_CASE("Bonferroni post hoc uses all pairs and alpha over m") {
    const auto b = bonferroni_posthoc({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}}, 0.05);
    CHECK(b.comparisons == 3);
    CHECK(b.threshold == doctest::Approx(0.05 / 3));
    REQUIRE(b.pairs.size() == 3);
    // MSE = 1 with 6 df; groups 1 and 3 differ by 2: t = 2 / sqrt(2/3).
    const auto& p13 = b.pairs[1];
    CHECK(p13.a == 0);
    CHECK(p13.b == 2);
    CHECK(p13.mean_difference == -2.0);
    CHECK(std::abs(p13.t) == doctest::Approx(2.0 / std::sqrt(2.0 / 3.0)));
    CHECK(p13.p_adjusted == doctest::Approx(std::min(1.0, 3 * p13.p_raw)));
}

TEST_CASE("factorial ANOVA df structure of the 2x2x4x3 design") {
    Rng rng(5);
    const auto d = random_design(rng, {2, 2, 4, 3}, 3);
    REQUIRE(d.observations.size() == 144);
    const auto t = factorial_anova(d);
    std::vector<std::size_t> df;
    for (const auto& e : t.effects) df.push_back(e.df);
    CHECK(df == std::vector<std::size_t>{1, 1, 3, 2, 1, 3, 2, 3, 2, 6, 3, 2, 6, 6, 6});
    CHECK(t.error.df == 96);
    CHECK(t.df_total == 143);
    double ss = t.error.ss;
    for (const auto& e : t.effects) ss += e.ss;
    CHECK(std::abs(ss - t.ss_total) <= 1e-9 * t.ss_total);
    CHECK(t.effects[0].effect == "F0");
    CHECK(t.effects[4].effect == "F0 * F1");
    CHECK(t.effects.back().effect == "F0 * F1 * F2 * F3");
}

TEST_CASE("two-factor sums of squares match textbook formulas") {
    Rng rng(6);
    const auto d = random_design(rng, {3, 4}, 5);
    const auto t = factorial_anova(d);
    double grand = 0.0;
    std::vector<double> ma(3, 0.0), mb(4, 0.0), mab(12, 0.0);
    for (const auto& o : d.observations) {
        grand += o.response;
        ma[o.cell[0]] += o.response;
        mb[o.cell[1]] += o.response;
        mab[o.cell[0] * 4 + o.cell[1]] += o.response;
    }
    grand /= 60.0;
    for (auto& v : ma) v /= 20.0;
    for (auto& v : mb) v /= 15.0;
    for (auto& v : mab) v /= 5.0;
    double ssa = 0, ssb = 0, ssab = 0, sse = 0;
    for (auto v : ma) ssa += 20.0 * (v - grand) * (v - grand);
    for (auto v : mb) ssb += 15.0 * (v - grand) * (v - grand);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const double inter = mab[i * 4 + j] - ma[i] - mb[j] + grand;
            ssab += 5.0 * inter * inter;
        }
    for (const auto& o : d.observations) {
        const double r = o.response - mab[o.cell[0] * 4 + o.cell[1]];
        sse += r * r;
    }
    CHECK(t.effects[0].ss == doctest::Approx(ssa).epsilon(1e-10));
    CHECK(t.effects[1].ss == doctest::Approx(ssb).epsilon(1e-10));
    CHECK(t.effects[2].ss == doctest::Approx(ssab).epsilon(1e-10));
    CHECK(t.error.ss == doctest::Approx(sse).epsilon(1e-10));
    const double ms_error = sse / 48.0;
    CHECK(t.effects[0].f == doctest::Approx(ssa / 2.0 / ms_error).epsilon(1e-10));
    CHECK(t.effects[0].partial_eta_sq == doctest::Approx(ssa / (ssa + sse)).epsilon(1e-10));
    CHECK(std::isnan(t.error.f));
}

TEST_CASE("factorial ANOVA rejects unbalanced designs") {
    Rng rng(7);
    auto d = random_design(rng, {2, 3}, 2);
    d.observations.pop_back();
    CHECK_THROWS_AS(factorial_anova(d), UnbalancedDesign);
    auto single = random_design(rng, {2, 3}, 1);
    CHECK_THROWS_AS(factorial_anova(single), UnbalancedDesign);
}

TEST_CASE("partial eta squared, stars and the rendered table") {
    CHECK(partial_eta_squared(1.0, 3.0) == 0.25);
    CHECK_THROWS_AS(partial_eta_squared(0.0, 0.0), DegenerateEffect);
    CHECK(significance_stars(0.0004) == "***");
    CHECK(significance_stars(0.004) == "**");
    CHECK(significance_stars(0.04) == "*");
    CHECK(significance_stars(0.4).empty());
    Rng rng(9);
    const auto text = render_anova_table(factorial_anova(random_design(rng, {2, 2}, 3)), "Demo");
    CHECK(text.find("Demo") != std::string::npos);
    CHECK(text.find("F0 * F1") != std::string::npos);
    CHECK(text.find("Error") != std::string::npos);
}
