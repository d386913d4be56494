// asymptotics.hpp — population probability limits for the ANCOVA estimator.
//
// thm1_value is the limit of n·Var(Δ̂): v1/π + v0/(1-π).
// thm2_value is the probability limit of n·V̂ for the model-based variance
// estimator: v1/(1-π) + v0/π. Here v_a = Var(Y - β̲Wᵀ W | A=a) at the
// probability-limit coefficients β̲. The two coincide exactly when π = 1/2
// or v1 = v0; otherwise the model-based estimator is biased, downward when
// thm2 < thm1 (anticonservative tests) and upward when thm2 > thm1.
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ancova/dgp.hpp"

namespace ancova {

struct PopulationCoefficients {
    double beta0 = 0.0;
    double betaA = 0.0;  // equals Δ under arbitrary misspecification
    std::vector<double> betaW;
};

enum class LimitPath { analytic, brute_force };
enum class BiasDirection { exact, anticonservative, conservative };

std::string_view to_string(LimitPath path);
std::string_view to_string(BiasDirection direction);

struct LimitStandardErrors {
    double betaA = 0.0;
    std::vector<double> betaW;
    double v1 = 0.0, v0 = 0.0;
    double thm1 = 0.0, thm2 = 0.0;
};

struct AsymptoticLimits {
    PopulationCoefficients beta_under;
    double thm1_value = 0.0;
    double thm2_value = 0.0;
    double v1 = 0.0, v0 = 0.0;
    double bias_ratio = 1.0;        // thm2/thm1
    double predicted_type1 = 0.05;  // at nominal 95%
    LimitPath path = LimitPath::analytic;
    std::uint64_t draws = 0;  // brute-force path only
    std::optional<LimitStandardErrors> mc_errors;
};

struct LimitOptions {
    std::uint64_t brute_draws = 10'000'000;
    std::uint64_t seed = 0x0A5CE55ULL;
    double level = 0.95;
};

// Probability-limit OLS coefficients. Linear arm means solve in closed form
// (slope mixing β̲W = π b1 + (1-π) b0); catalogue nonlinear forms go through
// the brute-force oracle and are cached per spec.
PopulationCoefficients population_coefficients(const DgpSpec& dgp);

// Limit of n·Var(Δ̂): v1/π + v0/(1-π).
double theorem1_limit(const DgpSpec& dgp);
// Probability limit of n·V̂ (model-based): v1/(1-π) + v0/π.
double theorem2_limit(const DgpSpec& dgp);

// Analytic when means are linear and arm noise is W-independent, otherwise
// routed to the brute-force oracle (path records which one ran).
AsymptoticLimits compute_limits(const DgpSpec& dgp, const LimitOptions& options = {});

// Independent simulation oracle: one giant i.i.d. sample, OLS for β̲,
// arm-wise residual variances for v1/v0, Monte Carlo SEs from the
// fourth-moment formula and the delta method.
AsymptoticLimits brute_force_limits(const DgpSpec& dgp, std::uint64_t draws, std::uint64_t seed);

struct BiasDiagnosis {
    BiasDirection direction = BiasDirection::exact;
    double predicted_type1 = 0.05;
};

// exact when thm1 == thm2 to relative 1e-12; otherwise the direction of the
// model-based bias, with predicted type I error 2Φ(-z_{1-α/2}·sqrt(thm2/thm1)).
BiasDiagnosis bias_diagnosis(const AsymptoticLimits& limits, double level);

}  // namespace ancova
