#pragma once

#include <span>

namespace crownnet::stats {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Lower-tail CDF of Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
    double mean = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    int df = 0;
};

/// One-sample t-test of H1: mean < 0. Requires at least two samples.
/// Zero variance yields p = 0 when every value is negative and p = 1 otherwise.
TTestResult one_sided_t_test_below_zero(std::span<const double> values);

double mean(std::span<const double> v);
/// Sample variance (n - 1 denominator).
double variance(std::span<const double> v);
/// Pearson correlation; 0 when either side is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Half-width of the normal-approximation 95% binomial interval.
double binomial_ci95(double proportion, std::size_t n);

}  // namespace crownnet::stats
