#pragma once

#include <span>

namespace sadd {

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> values);

/// I_x(a, b), evaluated with a Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    bool significant = false;

    bool operator==(const TTestResult&) const = default;
};

/// One-tailed paired t-test of H1: mean(a - b) > 0 at level `level`.
/// Zero-variance differences: positive mean is significant with infinite t,
/// all-zero differences give t = 0 and p = 0.5.
TTestResult paired_t_test_one_tailed(std::span<const double> a, std::span<const double> b,
                                     double level = 0.05);

}  // namespace sadd
