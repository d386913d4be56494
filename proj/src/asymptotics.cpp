// asymptotics.cpp — analytic limits and the brute-force simulation oracle.

#include "ancova/asymptotics.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "ancova/errors.hpp"
#include "ancova/linalg.hpp"
#include "ancova/stats.hpp"

namespace ancova {

std::string_view to_string(LimitPath path) {
    return path == LimitPath::analytic ? "analytic" : "brute_force";
}

std::string_view to_string(BiasDirection direction) {
    switch (direction) {
        case BiasDirection::exact: return "exact";
        case BiasDirection::anticonservative: return "anticonservative";
        case BiasDirection::conservative: return "conservative";
    }
    return "unknown";
}

namespace {

constexpr double kExactRelTol = 1e-12;

double predicted_type1_from(double thm1, double thm2, double level) {
    const double z = stats::norm_quantile(1.0 - (1.0 - level) / 2.0);
    return 2.0 * stats::norm_cdf(-z * std::sqrt(thm2 / thm1));
}

PopulationCoefficients analytic_coefficients(const DgpSpec& dgp) {
    const auto& b1 = std::get<LinearMean>(dgp.m1);
    const auto& b0 = std::get<LinearMean>(dgp.m0);
    const std::size_t k = dgp.k();
    const double pi = dgp.pi;

    PopulationCoefficients beta;
    beta.betaW.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        beta.betaW[j] = pi * b1.slopes[j] + (1.0 - pi) * b0.slopes[j];
    beta.betaA = dgp.delta();

    const auto means = dgp.covariate_means();
    const double ey = pi * dgp.expected_mean(dgp.m1) + (1.0 - pi) * dgp.expected_mean(dgp.m0);
    double bw_mean = 0.0;
    for (std::size_t j = 0; j < k; ++j) bw_mean += beta.betaW[j] * means[j];
    beta.beta0 = ey - beta.betaA * pi - bw_mean;
    return beta;
}

AsymptoticLimits analytic_limits(const DgpSpec& dgp, double level) {
    const auto& noise = std::get<ConstantNoise>(dgp.noise_sd);
    const auto& b1 = std::get<LinearMean>(dgp.m1);
    const auto& b0 = std::get<LinearMean>(dgp.m0);

    AsymptoticLimits limits;
    limits.beta_under = analytic_coefficients(dgp);
    limits.path = LimitPath::analytic;

    const auto variances = dgp.covariate_variances();
    double q1 = 0.0, q0 = 0.0;
    for (std::size_t j = 0; j < dgp.k(); ++j) {
        const double d1 = b1.slopes[j] - limits.beta_under.betaW[j];
        const double d0 = b0.slopes[j] - limits.beta_under.betaW[j];
        q1 += d1 * d1 * variances[j];
        q0 += d0 * d0 * variances[j];
    }
    limits.v1 = q1 + noise.sigma1 * noise.sigma1;
    limits.v0 = q0 + noise.sigma0 * noise.sigma0;

    const double pi = dgp.pi;
    limits.thm1_value = limits.v1 / pi + limits.v0 / (1.0 - pi);
    limits.thm2_value = limits.v1 / (1.0 - pi) + limits.v0 / pi;
    limits.bias_ratio = limits.thm2_value / limits.thm1_value;
    limits.predicted_type1 =
        predicted_type1_from(limits.thm1_value, limits.thm2_value, level);
    return limits;
}

// cache for brute-forced population coefficients of nonlinear specs
std::mutex g_cache_mutex;
std::map<std::string, PopulationCoefficients>& coefficient_cache() {
    static std::map<std::string, PopulationCoefficients> cache;
    return cache;
}

}  // namespace

PopulationCoefficients population_coefficients(const DgpSpec& dgp) {
    dgp.validate();
    if (dgp.linear_means()) return analytic_coefficients(dgp);

    const std::string key = dgp_to_json(dgp).dump();
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = coefficient_cache().find(key);
        if (it != coefficient_cache().end()) return it->second;
    }
    const LimitOptions defaults;
    const auto limits = brute_force_limits(dgp, defaults.brute_draws, defaults.seed);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        coefficient_cache().emplace(key, limits.beta_under);
    }
    return limits.beta_under;
}

double theorem1_limit(const DgpSpec& dgp) { return compute_limits(dgp).thm1_value; }

double theorem2_limit(const DgpSpec& dgp) { return compute_limits(dgp).thm2_value; }

AsymptoticLimits compute_limits(const DgpSpec& dgp, const LimitOptions& options) {
    dgp.validate();
    if (dgp.linear_means() && dgp.constant_noise()) {
        return analytic_limits(dgp, options.level);
    }
    auto limits = brute_force_limits(dgp, options.brute_draws, options.seed);
    limits.predicted_type1 =
        predicted_type1_from(limits.thm1_value, limits.thm2_value, options.level);
    return limits;
}

AsymptoticLimits brute_force_limits(const DgpSpec& dgp, std::uint64_t draws,
                                    std::uint64_t seed) {
    dgp.validate();
    if (draws < 100'000) {
        throw ValidationError("brute_force_limits: need at least 1e5 draws");
    }
    const std::size_t k = dgp.k();
    const std::size_t p = k + 2;
    const double pi = dgp.pi;

    std::vector<double> w(k);
    std::vector<double> x(p);

    // Pass 1: accumulate XᵀX and Xᵀy over the draw stream.
    Matrix gram(p, p);
    std::vector<double> xty(p, 0.0);
    for (std::uint64_t i = 0; i < draws; ++i) {
        RandomStream ws(seed, i, StreamTag::oracle_covariates);
        RandomStream as(seed, i, StreamTag::oracle_arm);
        RandomStream ns(seed, i, StreamTag::oracle_noise);
        dgp.sample_covariate_row(ws, w);
        const int arm = as.next_u01() < pi ? 1 : 0;
        const double sd = dgp.noise_sd_at(arm, w);
        const double y = evaluate_mean(arm == 1 ? dgp.m1 : dgp.m0, w) + dgp.sample_noise(ns, sd);

        x[0] = 1.0;
        x[1] = static_cast<double>(arm);
        for (std::size_t j = 0; j < k; ++j) x[2 + j] = w[j];
        for (std::size_t r = 0; r < p; ++r) {
            xty[r] += x[r] * y;
            for (std::size_t c = 0; c <= r; ++c) gram(r, c) += x[r] * x[c];
        }
    }
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = r + 1; c < p; ++c) gram(r, c) = gram(c, r);

    const std::vector<double> beta = solve_spd(gram, xty, "oracle normal equations");

    PopulationCoefficients coeffs;
    coeffs.beta0 = beta[0];
    coeffs.betaA = beta[1];
    coeffs.betaW.assign(beta.begin() + 2, beta.end());

    // Pass 2: arm counts and means of u = y - β̂Wᵀ w (counter-based streams
    // regenerate the identical sample).
    std::uint64_t n1 = 0;
    double sum1 = 0.0, sum0 = 0.0;
    for (std::uint64_t i = 0; i < draws; ++i) {
        RandomStream ws(seed, i, StreamTag::oracle_covariates);
        RandomStream as(seed, i, StreamTag::oracle_arm);
        RandomStream ns(seed, i, StreamTag::oracle_noise);
        dgp.sample_covariate_row(ws, w);
        const int arm = as.next_u01() < pi ? 1 : 0;
        const double sd = dgp.noise_sd_at(arm, w);
        const double y = evaluate_mean(arm == 1 ? dgp.m1 : dgp.m0, w) + dgp.sample_noise(ns, sd);
        double u = y;
        for (std::size_t j = 0; j < k; ++j) u -= coeffs.betaW[j] * w[j];
        if (arm == 1) {
            ++n1;
            sum1 += u;
        } else {
            sum0 += u;
        }
    }
    const std::uint64_t n0 = draws - n1;
    if (n1 < 2 || n0 < 2) throw NumericalError("brute_force_limits: an arm is almost empty");
    const double mean1 = sum1 / static_cast<double>(n1);
    const double mean0 = sum0 / static_cast<double>(n0);

    // Pass 3: central second/fourth moments of u per arm, plus the sandwich
    // meat for coefficient standard errors.
    double m2_1 = 0.0, m4_1 = 0.0, m2_0 = 0.0, m4_0 = 0.0;
    Matrix meat(p, p);
    for (std::uint64_t i = 0; i < draws; ++i) {
        RandomStream ws(seed, i, StreamTag::oracle_covariates);
        RandomStream as(seed, i, StreamTag::oracle_arm);
        RandomStream ns(seed, i, StreamTag::oracle_noise);
        dgp.sample_covariate_row(ws, w);
        const int arm = as.next_u01() < pi ? 1 : 0;
        const double sd = dgp.noise_sd_at(arm, w);
        const double y = evaluate_mean(arm == 1 ? dgp.m1 : dgp.m0, w) + dgp.sample_noise(ns, sd);
        double u = y;
        for (std::size_t j = 0; j < k; ++j) u -= coeffs.betaW[j] * w[j];
        const double d = u - (arm == 1 ? mean1 : mean0);
        const double d2 = d * d;
        if (arm == 1) {
            m2_1 += d2;
            m4_1 += d2 * d2;
        } else {
            m2_0 += d2;
            m4_0 += d2 * d2;
        }
        const double r = u - coeffs.beta0 - coeffs.betaA * static_cast<double>(arm);
        x[0] = 1.0;
        x[1] = static_cast<double>(arm);
        for (std::size_t j = 0; j < k; ++j) x[2 + j] = w[j];
        for (std::size_t rr = 0; rr < p; ++rr)
            for (std::size_t cc = 0; cc <= rr; ++cc) meat(rr, cc) += r * r * x[rr] * x[cc];
    }

    AsymptoticLimits limits;
    limits.beta_under = coeffs;
    limits.path = LimitPath::brute_force;
    limits.draws = draws;

    limits.v1 = m2_1 / static_cast<double>(n1 - 1);
    limits.v0 = m2_0 / static_cast<double>(n0 - 1);
    limits.thm1_value = limits.v1 / pi + limits.v0 / (1.0 - pi);
    limits.thm2_value = limits.v1 / (1.0 - pi) + limits.v0 / pi;
    limits.bias_ratio = limits.thm2_value / limits.thm1_value;
    limits.predicted_type1 =
        predicted_type1_from(limits.thm1_value, limits.thm2_value, 0.95);

    // Monte Carlo standard errors: fourth-moment formula for each v, delta
    // method across the (independent) arms for the two limits.
    LimitStandardErrors se;
    const double mu4_1 = m4_1 / static_cast<double>(n1);
    const double mu4_0 = m4_0 / static_cast<double>(n0);
    const double var_v1 = (mu4_1 - limits.v1 * limits.v1) / static_cast<double>(n1);
    const double var_v0 = (mu4_0 - limits.v0 * limits.v0) / static_cast<double>(n0);
    se.v1 = var_v1 > 0.0 ? std::sqrt(var_v1) : 0.0;
    se.v0 = var_v0 > 0.0 ? std::sqrt(var_v0) : 0.0;
    se.thm1 = std::sqrt(var_v1 / (pi * pi) + var_v0 / ((1.0 - pi) * (1.0 - pi)));
    se.thm2 = std::sqrt(var_v1 / ((1.0 - pi) * (1.0 - pi)) + var_v0 / (pi * pi));

    // Sandwich covariance of β̂: G⁻¹ M G⁻¹.
    for (std::size_t rr = 0; rr < p; ++rr)
        for (std::size_t cc = rr + 1; cc < p; ++cc) meat(rr, cc) = meat(cc, rr);
    se.betaW.resize(k);
    for (std::size_t target = 0; target < p; ++target) {
        std::vector<double> e(p, 0.0);
        e[target] = 1.0;
        const std::vector<double> ginv_e = solve_spd(gram, e, "oracle normal equations");
        double quad = 0.0;
        for (std::size_t rr = 0; rr < p; ++rr) {
            double acc = 0.0;
            for (std::size_t cc = 0; cc < p; ++cc) acc += meat(rr, cc) * ginv_e[cc];
            quad += ginv_e[rr] * acc;
        }
        const double value = quad > 0.0 ? std::sqrt(quad) : 0.0;
        if (target == 1) se.betaA = value;
        else if (target >= 2) se.betaW[target - 2] = value;
    }
    limits.mc_errors = std::move(se);
    return limits;
}

BiasDiagnosis bias_diagnosis(const AsymptoticLimits& limits, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ValidationError("bias_diagnosis: level must lie in (0,1)");
    }
    BiasDiagnosis diagnosis;
    diagnosis.predicted_type1 =
        predicted_type1_from(limits.thm1_value, limits.thm2_value, level);
    const double scale = std::max(std::fabs(limits.thm1_value), std::fabs(limits.thm2_value));
    if (std::fabs(limits.thm1_value - limits.thm2_value) <= kExactRelTol * scale) {
        diagnosis.direction = BiasDirection::exact;
    } else if (limits.thm2_value < limits.thm1_value) {
        diagnosis.direction = BiasDirection::anticonservative;
    } else {
        diagnosis.direction = BiasDirection::conservative;
    }
    return diagnosis;
}

}  // namespace ancova
