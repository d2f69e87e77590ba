#include "sadd/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sadd/error.hpp"

namespace sadd {

double mean(std::span<const double> values) {
    if (values.empty()) throw Error("stats", "mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double mu = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {

double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
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
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw Error("stats", "beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The continued fraction converges fast for x < (a + 1) / (a + b + 2);
    // use the symmetry I_x(a, b) = 1 - I_{1-x}(b, a) otherwise.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw Error("stats", "degrees of freedom must be positive");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test_one_tailed(std::span<const double> a, std::span<const double> b, double level) {
    if (a.size() != b.size()) throw Error("stats", "paired samples differ in length");
    if (a.size() < 2) throw Error("stats", "paired t-test needs at least two pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double mu = mean(d);
    const double sd = sample_std(d);
    const double n = static_cast<double>(d.size());

    TTestResult result;
    if (sd == 0.0) {
        if (mu > 0.0) {
            result.t = std::numeric_limits<double>::infinity();
            result.p = 0.0;
        } else if (mu < 0.0) {
            result.t = -std::numeric_limits<double>::infinity();
            result.p = 1.0;
        } else {
            result.t = 0.0;
            result.p = 0.5;
        }
    } else {
        result.t = mu / (sd / std::sqrt(n));
        result.p = student_t_cdf(-result.t, n - 1.0);
    }
    result.significant = mu > 0.0 && result.p < level;
    return result;
}

}  // namespace sadd
