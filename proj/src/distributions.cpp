#include "bcbench/distributions.hpp"

#include "bcbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bcbench {

namespace {

double beta_continued_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw NumericError("incomplete beta needs a, b > 0");
    if (std::isnan(x)) throw NumericError("incomplete beta at NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The fraction converges quickly for x < (a+1)/(a+b+2); use symmetry otherwise.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_upper_tail(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw NumericError("F distribution needs positive degrees of freedom");
    if (std::isnan(f)) throw NumericError("F statistic is NaN");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw NumericError("t distribution needs positive degrees of freedom");
    if (std::isnan(t)) throw NumericError("t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double binomial_pmf(std::size_t k, std::size_t n, double p) {
    if (k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double nk = static_cast<double>(n), kk = static_cast<double>(k);
    return std::exp(std::lgamma(nk + 1) - std::lgamma(kk + 1) - std::lgamma(nk - kk + 1) + kk * std::log(p) +
                    (nk - kk) * std::log1p(-p));
}

double binomial_cdf(std::size_t k, std::size_t n, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i <= std::min(k, n); ++i) s += binomial_pmf(i, n, p);
    return std::min(1.0, s);
}

double binomial_two_sided(std::size_t k, std::size_t n, double p) {
    if (k > n) throw NumericError("binomial successes exceed trials");
    const double observed = binomial_pmf(k, n, p);
    // Relative slack so outcomes tied with the observed one count as extreme.
    const double limit = observed * (1.0 + 1e-7);
    double s = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double q = binomial_pmf(i, n, p);
        if (q <= limit) s += q;
    }
    return std::min(1.0, s);
}

}  // namespace bcbench
