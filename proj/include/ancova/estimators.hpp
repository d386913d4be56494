// estimators.hpp — point estimators, variance estimators, Wald inference.
//
// All operations are pure functions of immutable inputs.
#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ancova/trial_data.hpp"

namespace ancova {

enum class VarianceKind {
    model_based_paper,      // residual variance over (n-1)[Var(A) - Cov(W,A)ᵀVar(W)⁻¹Cov(W,A)]
    model_based_classical,  // s²(XᵀX)⁻¹ with s² = RSS/(n-k-2)
    sandwich_if,            // empirical influence-function variance
    sandwich_if_df,         // same, scaled by n/(n-k-2)
    welch,                  // s1²/n1 + s0²/n0
    pooled_t,               // pooled two-sample t variance
};

std::string_view to_string(VarianceKind kind);
VarianceKind variance_kind_from_string(std::string_view name);

struct VarianceEstimate {
    double value = 0.0;
    VarianceKind kind = VarianceKind::model_based_paper;
    // Degrees of freedom for an opt-in t reference; empty means standard
    // normal. welch and pooled_t carry their natural df by default.
    std::optional<double> dof_reference;
};

struct AncovaFit {
    double beta0 = 0.0;
    double betaA = 0.0;  // the adjusted treatment-effect estimate
    std::vector<double> betaW;
    std::vector<double> residuals;
    std::size_t n = 0;
    std::size_t k = 0;
    double pi_hat = 0.0;
    double rss = 0.0;
    double condition = 0.0;
    double xtx_inv_aa = 0.0;  // (XᵀX)⁻¹ entry for the treatment column
};

// Difference in arm sample means.
double unadjusted_estimate(const TrialDataset& data);

// OLS on [1, A, W] via Householder QR; requires full column rank, condition
// estimate below 1e12, and n >= k+3.
AncovaFit ancova_fit(const TrialDataset& data);

// Var̂(r) / ((n-1)[Var̂(A) - Cov̂(W,A)ᵀ Var̂(W)⁻¹ Cov̂(W,A)]), every sample
// statistic with denominator n-1.
VarianceEstimate model_based_variance(const TrialDataset& data, const AncovaFit& fit);

// The software-default OLS variance: RSS/(n-k-2) times (XᵀX)⁻¹ on the A column.
VarianceEstimate model_based_classical(const TrialDataset& data, const AncovaFit& fit);

enum class PiSource { estimated, design };

// Plug-in influence values (A_i - π)/(π(1-π)) · r_i.
std::vector<double> empirical_influence(const TrialDataset& data, const AncovaFit& fit,
                                        PiSource pi_source = PiSource::estimated,
                                        double design_pi = 0.5);

enum class SandwichCorrection { none, df };

// Σ IF_i² / n², optionally scaled by n/(n-k-2). Default correction is df.
VarianceEstimate sandwich_variance(const TrialDataset& data, const AncovaFit& fit,
                                   SandwichCorrection correction = SandwichCorrection::df,
                                   PiSource pi_source = PiSource::estimated,
                                   double design_pi = 0.5);

// s1²/n1 + s0²/n0; Satterthwaite df. Each arm needs >= 2 observations.
VarianceEstimate welch_variance(const TrialDataset& data);

// Pooled two-sample t variance s_p²(1/n1 + 1/n0); df = n-2.
VarianceEstimate pooled_t_variance(const TrialDataset& data);

// Copy with the kind's natural t reference attached (n-k-2 residual df for
// the regression-based kinds).
VarianceEstimate with_t_reference(VarianceEstimate estimate, std::size_t n, std::size_t k);

struct WaldResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double level = 0.95;
};

// Two-sided Wald test; reference distribution is standard normal unless the
// estimate carries a dof_reference.
WaldResult wald_test(double estimate, const VarianceEstimate& variance, double null_value,
                     double level);

}  // namespace ancova
