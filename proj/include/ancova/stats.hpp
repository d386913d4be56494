// stats.hpp — reference distributions and moment helpers.
#pragma once

#include <cstddef>
#include <span>

namespace ancova::stats {

double norm_pdf(double x);
double norm_cdf(double x);
// Inverse standard normal CDF, accurate to ~1 ulp (rational approximation
// plus one Halley refinement against erfc).
double norm_quantile(double p);

double t_cdf(double x, double df);
double t_quantile(double p, double df);

// Satterthwaite degrees of freedom for s1²/n1 + s0²/n0.
double welch_satterthwaite_df(double s1sq, std::size_t n1, double s0sq, std::size_t n0);

double binomial_se(double p, std::size_t reps);

double mean(std::span<const double> x);
// Sample variance, denominator n-1.
double sample_variance(std::span<const double> x);
// Standard error of the sample variance via the fourth-moment formula
// sqrt((m4 - s⁴)/n), m4 the central fourth moment.
double variance_standard_error(std::span<const double> x);

}  // namespace ancova::stats
