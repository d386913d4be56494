// estimators.cpp — ANCOVA point and variance estimators.

#include "ancova/estimators.hpp"

#include <cmath>

#include "ancova/errors.hpp"
#include "ancova/kernels.hpp"
#include "ancova/stats.hpp"

namespace ancova {

std::string_view to_string(VarianceKind kind) {
    switch (kind) {
        case VarianceKind::model_based_paper: return "model_based_paper";
        case VarianceKind::model_based_classical: return "model_based_classical";
        case VarianceKind::sandwich_if: return "sandwich_if";
        case VarianceKind::sandwich_if_df: return "sandwich_if_df";
        case VarianceKind::welch: return "welch";
        case VarianceKind::pooled_t: return "pooled_t";
    }
    return "unknown";
}

VarianceKind variance_kind_from_string(std::string_view name) {
    if (name == "model_based_paper") return VarianceKind::model_based_paper;
    if (name == "model_based_classical") return VarianceKind::model_based_classical;
    if (name == "sandwich_if") return VarianceKind::sandwich_if;
    if (name == "sandwich_if_df") return VarianceKind::sandwich_if_df;
    if (name == "welch") return VarianceKind::welch;
    if (name == "pooled_t") return VarianceKind::pooled_t;
    throw ValidationError("unknown variance estimator '" + std::string(name) +
                          "'; expected one of model_based_paper, model_based_classical, "
                          "sandwich_if, sandwich_if_df, welch, pooled_t");
}

namespace {

struct ArmSummary {
    std::size_t n1 = 0, n0 = 0;
    double mean1 = 0.0, mean0 = 0.0;
    double ss1 = 0.0, ss0 = 0.0;  // centered sums of squares
};

ArmSummary summarize_arms(const TrialDataset& data) {
    ArmSummary s;
    double sum1 = 0.0, sum0 = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (data.arms[i] == 1) {
            ++s.n1;
            sum1 += data.outcomes[i];
        } else {
            ++s.n0;
            sum0 += data.outcomes[i];
        }
    }
    if (s.n1 == 0 || s.n0 == 0) throw ValidationError("dataset: an arm is empty");
    s.mean1 = sum1 / static_cast<double>(s.n1);
    s.mean0 = sum0 / static_cast<double>(s.n0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double d = data.outcomes[i] - (data.arms[i] == 1 ? s.mean1 : s.mean0);
        (data.arms[i] == 1 ? s.ss1 : s.ss0) += d * d;
    }
    return s;
}

std::vector<double> centered(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    const double m = stats::mean(out);
    for (double& v : out) v -= m;
    return out;
}

}  // namespace

double unadjusted_estimate(const TrialDataset& data) {
    data.validate();
    const auto s = summarize_arms(data);
    return s.mean1 - s.mean0;
}

AncovaFit ancova_fit(const TrialDataset& data) {
    data.validate();
    const std::size_t n = data.n();
    const std::size_t k = data.k();
    if (n < k + 3) {
        throw ValidationError("ancova_fit: need n >= k+3 (" + std::to_string(k + 3) +
                              ") observations, got " + std::to_string(n));
    }
    const DesignMatrix design = design_matrix(data);
    OlsOptions options;
    options.column_labels = design.column_labels;
    const OlsFit ols = least_squares_qr(design.values, data.outcomes, options);

    AncovaFit fit;
    fit.beta0 = ols.coefficients[0];
    fit.betaA = ols.coefficients[1];
    fit.betaW.assign(ols.coefficients.begin() + 2, ols.coefficients.end());
    fit.residuals = ols.residuals;
    fit.n = n;
    fit.k = k;
    fit.pi_hat = data.pi_hat();
    fit.rss = ols.rss;
    fit.condition = ols.condition;
    fit.xtx_inv_aa = xtx_inverse_diagonal(ols.r_factor, 1);
    return fit;
}

VarianceEstimate model_based_variance(const TrialDataset& data, const AncovaFit& fit) {
    const std::size_t n = fit.n;
    const std::size_t k = fit.k;
    const double nm1 = static_cast<double>(n - 1);

    const double var_r = stats::sample_variance(fit.residuals);

    std::vector<double> arm_values(n);
    for (std::size_t i = 0; i < n; ++i) arm_values[i] = static_cast<double>(data.arms[i]);
    const std::vector<double> ac = centered(arm_values);
    const double var_a = kernels::sum_squares(ac) / nm1;

    double quad = 0.0;
    if (k > 0) {
        std::vector<std::vector<double>> wc(k);
        for (std::size_t j = 0; j < k; ++j) wc[j] = centered(data.covariates.col(j));

        Matrix var_w(k, k);
        std::vector<double> cov_wa(k);
        for (std::size_t j = 0; j < k; ++j) {
            cov_wa[j] = kernels::dot(wc[j], ac) / nm1;
            for (std::size_t l = 0; l <= j; ++l) {
                const double c = kernels::dot(wc[j], wc[l]) / nm1;
                var_w(j, l) = c;
                var_w(l, j) = c;
            }
        }
        const std::vector<double> z = solve_spd(var_w, cov_wa, "sample covariance of W");
        for (std::size_t j = 0; j < k; ++j) quad += cov_wa[j] * z[j];
    }

    const double denom = nm1 * (var_a - quad);
    if (!(denom > 0.0)) {
        throw NumericalError("model_based_variance: denominator not positive "
                             "(degenerate treatment indicator)");
    }
    return {var_r / denom, VarianceKind::model_based_paper, std::nullopt};
}

VarianceEstimate model_based_classical(const TrialDataset& data, const AncovaFit& fit) {
    (void)data;
    const std::size_t n = fit.n;
    const std::size_t k = fit.k;
    if (n <= k + 2) throw NumericalError("model_based_classical: no residual degrees of freedom");
    const double s2 = fit.rss / static_cast<double>(n - k - 2);
    return {s2 * fit.xtx_inv_aa, VarianceKind::model_based_classical, std::nullopt};
}

std::vector<double> empirical_influence(const TrialDataset& data, const AncovaFit& fit,
                                        PiSource pi_source, double design_pi) {
    double pi = fit.pi_hat;
    if (pi_source == PiSource::design) {
        if (!(design_pi > 0.0 && design_pi < 1.0)) {
            throw ValidationError("empirical_influence: design pi must lie in (0,1)");
        }
        pi = design_pi;
    }
    const double scale = 1.0 / (pi * (1.0 - pi));
    std::vector<double> values(fit.n);
    for (std::size_t i = 0; i < fit.n; ++i) {
        values[i] = (static_cast<double>(data.arms[i]) - pi) * scale * fit.residuals[i];
    }
    return values;
}

VarianceEstimate sandwich_variance(const TrialDataset& data, const AncovaFit& fit,
                                   SandwichCorrection correction, PiSource pi_source,
                                   double design_pi) {
    const std::vector<double> inf = empirical_influence(data, fit, pi_source, design_pi);
    const double n = static_cast<double>(fit.n);
    double value = kernels::sum_squares(inf) / (n * n);
    VarianceKind kind = VarianceKind::sandwich_if;
    if (correction == SandwichCorrection::df) {
        value *= n / static_cast<double>(fit.n - fit.k - 2);
        kind = VarianceKind::sandwich_if_df;
    }
    return {value, kind, std::nullopt};
}

VarianceEstimate welch_variance(const TrialDataset& data) {
    data.validate();
    const auto s = summarize_arms(data);
    if (s.n1 < 2 || s.n0 < 2) {
        throw ValidationError("welch_variance: each arm needs at least 2 observations");
    }
    const double s1sq = s.ss1 / static_cast<double>(s.n1 - 1);
    const double s0sq = s.ss0 / static_cast<double>(s.n0 - 1);
    const double value = s1sq / static_cast<double>(s.n1) + s0sq / static_cast<double>(s.n0);
    const double df = stats::welch_satterthwaite_df(s1sq, s.n1, s0sq, s.n0);
    return {value, VarianceKind::welch, df};
}

VarianceEstimate pooled_t_variance(const TrialDataset& data) {
    data.validate();
    const auto s = summarize_arms(data);
    if (s.n1 + s.n0 < 3) throw ValidationError("pooled_t_variance: need at least 3 observations");
    const double pooled = (s.ss1 + s.ss0) / static_cast<double>(s.n1 + s.n0 - 2);
    const double value =
        pooled * (1.0 / static_cast<double>(s.n1) + 1.0 / static_cast<double>(s.n0));
    return {value, VarianceKind::pooled_t, static_cast<double>(s.n1 + s.n0 - 2)};
}

VarianceEstimate with_t_reference(VarianceEstimate estimate, std::size_t n, std::size_t k) {
    switch (estimate.kind) {
        case VarianceKind::model_based_paper:
        case VarianceKind::model_based_classical:
        case VarianceKind::sandwich_if:
        case VarianceKind::sandwich_if_df:
            estimate.dof_reference = static_cast<double>(n - k - 2);
            break;
        case VarianceKind::welch:
        case VarianceKind::pooled_t:
            break;  // already carry their df
    }
    return estimate;
}

WaldResult wald_test(double estimate, const VarianceEstimate& variance, double null_value,
                     double level) {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("wald_test: level must lie in (0,1)");
    if (!(variance.value > 0.0)) throw NumericalError("wald_test: zero variance");

    const double se = std::sqrt(variance.value);
    const double z = (estimate - null_value) / se;
    const double tail = (1.0 - level) / 2.0;

    double p, q;
    if (variance.dof_reference.has_value()) {
        const double df = *variance.dof_reference;
        p = 2.0 * stats::t_cdf(-std::fabs(z), df);
        q = stats::t_quantile(1.0 - tail, df);
    } else {
        p = 2.0 * stats::norm_cdf(-std::fabs(z));
        q = stats::norm_quantile(1.0 - tail);
    }

    WaldResult result;
    result.estimate = estimate;
    result.std_error = se;
    result.statistic = z;
    result.p_value = p;
    result.ci_lower = estimate - q * se;
    result.ci_upper = estimate + q * se;
    result.level = level;
    return result;
}

}  // namespace ancova
