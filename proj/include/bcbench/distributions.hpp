#pragma once

#include <cstddef>

namespace bcbench {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

// P(F > f) for F(d1, d2).
double f_upper_tail(double f, double d1, double d2);

// Two-sided P(|T| >= |t|) for Student t with df degrees of freedom.
double t_two_sided(double t, double df);

// P(X = k), P(X <= k) for Binomial(n, p).
double binomial_pmf(std::size_t k, std::size_t n, double p);
double binomial_cdf(std::size_t k, std::size_t n, double p);

// Two-sided exact test: total probability of outcomes no more likely than k.
double binomial_two_sided(std::size_t k, std::size_t n, double p = 0.5);

}  // namespace bcbench
