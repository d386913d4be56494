// stats.cpp — normal/t distributions and moment helpers.

#include "ancova/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

#include "ancova/kernels.hpp"

namespace ancova::stats {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("norm_quantile: p must lie in (0,1)");
    }
    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley step against the exact CDF.
    const double e = norm_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double t_cdf(double x, double df) {
    boost::math::students_t_distribution<double> dist(df);
    return boost::math::cdf(dist, x);
}

double t_quantile(double p, double df) {
    boost::math::students_t_distribution<double> dist(df);
    return boost::math::quantile(dist, p);
}

double welch_satterthwaite_df(double s1sq, std::size_t n1, double s0sq, std::size_t n0) {
    const double a1 = s1sq / static_cast<double>(n1);
    const double a0 = s0sq / static_cast<double>(n0);
    const double numer = (a1 + a0) * (a1 + a0);
    const double denom = a1 * a1 / static_cast<double>(n1 - 1) +
                         a0 * a0 / static_cast<double>(n0 - 1);
    if (denom == 0.0) return static_cast<double>(n1 + n0 - 2);
    return numer / denom;
}

double binomial_se(double p, std::size_t reps) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return kernels::sum(x) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double m = mean(x);
    return kernels::centered_power_sums(x, m).sum2 / static_cast<double>(n - 1);
}

double variance_standard_error(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double m = mean(x);
    const auto ps = kernels::centered_power_sums(x, m);
    const double s2 = ps.sum2 / static_cast<double>(n - 1);
    const double m4 = ps.sum4 / static_cast<double>(n);
    const double var_of_var = (m4 - s2 * s2) / static_cast<double>(n);
    return var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0;
}

}  // namespace ancova::stats
