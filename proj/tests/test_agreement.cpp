#include "bcbench/agreement.hpp"
#include "bcbench/error.hpp"
#include "bcbench/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bcbench;

TEST_CASE("identical ratings give kappa 1") {
    const std::vector<std::string> a{"x", "y", "y", "z", "x"};
    CHECK(cohen_kappa({a, a}) == 1.0);
    const std::vector<std::string> constant(6, "x");
    CHECK(cohen_kappa({constant, constant}) == 1.0);
}

TEST_CASE("2x2 worked example") {
    // 20 yes/yes, 5 yes/no, 10 no/yes, 15 no/no: p_o = 0.7, p_e = 0.5.
    std::vector<std::string> a, b;
    auto add = [&](const char* x, const char* y, int n) {
        for (int i = 0; i < n; ++i) {
            a.emplace_back(x);
            b.emplace_back(y);
        }
    };
    add("yes", "yes", 20);
    add("yes", "no", 5);
    add("no", "yes", 10);
    add("no", "no", 15);
    CHECK(std::abs(cohen_kappa({a, b}) - 0.4) < 1e-12);
    CHECK(std::abs(cohen_kappa({a, b}) - oracle::kappa(a, b)) < 1e-12);
}

TEST_CASE("random rating pairs match the contingency oracle") {
    Rng rng(8);
    const std::vector<std::string> cats{"a", "b", "c", "d"};
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.index(60);
        std::vector<std::string> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = cats[rng.index(cats.size())];
            b[i] = rng.bernoulli(0.6) ? a[i] : cats[rng.index(cats.size())];
        }
        const double want = oracle::kappa(a, b);
        if (!std::isfinite(want)) continue;
        CHECK(std::abs(cohen_kappa({a, b}) - want) < 1e-12);
    }
}

TEST_CASE("independent raters are near zero") {
    Rng rng(12);
    std::vector<std::string> a(10000), b(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::to_string(rng.index(3));
        b[i] = std::to_string(rng.index(3));
    }
    CHECK(std::abs(cohen_kappa({a, b})) <= 0.05);
}

TEST_CASE("kappa errors, pairwise mean and bands") {
    CHECK_THROWS_AS(cohen_kappa({{"a"}, {"a"}}), EmptyInput);
    CHECK_THROWS_AS(cohen_kappa({{"a", "b"}, {"a"}}), SchemaError);
    const std::vector<std::vector<std::string>> raters{{"a", "b", "a", "b"}, {"a", "b", "a", "b"}, {"a", "b", "b", "a"}};
    const double k01 = 1.0, k02 = oracle::kappa(raters[0], raters[2]), k12 = oracle::kappa(raters[1], raters[2]);
    CHECK(mean_pairwise_kappa(raters) == doctest::Approx((k01 + k02 + k12) / 3.0));
    CHECK(interpret_kappa(0.9) == "almost perfect");
    CHECK(interpret_kappa(0.5) == "moderate");
}
