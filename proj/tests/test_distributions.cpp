#include "bcbench/distributions.hpp"
#include "bcbench/random.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <doctest.h>

#include <cmath>

using namespace bcbench;

TEST_CASE("incomplete beta agrees with Boost.Math") {
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(0.1, 60.0), b = rng.uniform(0.1, 60.0), x = rng.uniform(0.0, 1.0);
        CHECK(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
    }
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
}

TEST_CASE("F upper tail agrees with Boost.Math") {
    Rng rng(2);
    for (int i = 0; i < 300; ++i) {
        const double d1 = 1 + static_cast<double>(rng.index(12)), d2 = 2 + static_cast<double>(rng.index(200));
        const double f = rng.uniform(0.0, 20.0);
        const double want = boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f));
        CHECK(f_upper_tail(f, d1, d2) == doctest::Approx(want).epsilon(1e-9));
    }
    CHECK(f_upper_tail(0.0, 3, 10) == 1.0);
}

TEST_CASE("two-sided t agrees with Boost.Math") {
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        const double df = 1 + static_cast<double>(rng.index(150));
        const double t = rng.uniform(-8.0, 8.0);
        const double want = 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
        CHECK(t_two_sided(t, df) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("binomial probabilities agree with Boost.Math") {
    for (std::size_t n : {1u, 7u, 30u, 100u})
        for (std::size_t k = 0; k <= n; k += 1 + n / 10) {
            const boost::math::binomial_distribution<double> d(static_cast<double>(n), 0.5);
            CHECK(binomial_pmf(k, n, 0.5) == doctest::Approx(boost::math::pdf(d, static_cast<double>(k))).epsilon(1e-10));
            CHECK(binomial_cdf(k, n, 0.5) == doctest::Approx(boost::math::cdf(d, static_cast<double>(k))).epsilon(1e-10));
        }
}

TEST_CASE("two-sided binomial test for a fair coin") {
    // Symmetric case: twice the smaller tail, capped at 1.
    for (std::size_t n = 1; n <= 40; ++n)
        for (std::size_t k = 0; k <= n; ++k) {
            const double tail = k * 2 <= n ? binomial_cdf(k, n, 0.5) : 1.0 - binomial_cdf(k - 1, n, 0.5);
            CHECK(binomial_two_sided(k, n) == doctest::Approx(std::min(1.0, 2.0 * tail)).epsilon(1e-12));
        }
    // Unanimous hits first fall below 0.01 at the eighth trial: 2 * 0.5^8.
    CHECK(binomial_two_sided(7, 7) > 0.01);
    CHECK(binomial_two_sided(8, 8) == doctest::Approx(2.0 / 256.0));
    CHECK(binomial_two_sided(0, 8) < 0.01);
}
