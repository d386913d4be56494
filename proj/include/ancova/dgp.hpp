// dgp.hpp — generative description of (W, A, Y) and its JSON form.
//
// Covariate coordinates are independent and drawn from bounded laws. Arm
// mean functions come from a fixed catalogue so specs serialise
// deterministically. Noise is either constant per arm or a catalogue
// variance function of W.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ancova/rng.hpp"

namespace ancova {

// ---------------------------------------------------------------------------
// covariate laws
// ---------------------------------------------------------------------------

struct UniformLaw {
    std::vector<double> a, b;  // per coordinate
};

struct TruncatedNormalLaw {
    std::vector<double> mu, sigma, lower, upper;
};

struct DiscreteLaw {
    std::vector<std::vector<double>> support;        // per coordinate atoms
    std::vector<std::vector<double>> probabilities;  // matching probabilities
};

using CovariateLaw = std::variant<UniformLaw, TruncatedNormalLaw, DiscreteLaw>;

// ---------------------------------------------------------------------------
// mean catalogue
// ---------------------------------------------------------------------------

struct LinearMean {
    double intercept = 0.0;
    std::vector<double> slopes;
};

struct QuadraticMean {
    double intercept = 0.0;
    std::vector<double> slopes, quad;  // intercept + bᵀw + qᵀ(w∘w)
};

struct InteractionMean {
    double intercept = 0.0;
    std::vector<double> slopes;
    double pair_coefficient = 0.0;  // * w1 * w2 (needs k >= 2)
};

struct ExponentialBoundedMean {
    double intercept = 0.0;
    std::vector<double> scale, rate;  // intercept + Σ scale_j exp(rate_j w_j)
};

using MeanForm = std::variant<LinearMean, QuadraticMean, InteractionMean, ExponentialBoundedMean>;

double evaluate_mean(const MeanForm& form, std::span<const double> w);

// ---------------------------------------------------------------------------
// noise
// ---------------------------------------------------------------------------

struct ConstantNoise {
    double sigma1 = 1.0, sigma0 = 1.0;
};

struct FunctionNoise {
    MeanForm v1, v0;  // per-arm variance as a function of W
};

using NoiseSpec = std::variant<ConstantNoise, FunctionNoise>;

enum class NoiseShape { gaussian, centered_uniform, centered_two_point };

// ---------------------------------------------------------------------------
// DgpSpec
// ---------------------------------------------------------------------------

struct DgpSpec {
    double pi = 0.5;  // P(A = 1)
    CovariateLaw covariate_law;
    MeanForm m1, m0;  // arm mean functions
    NoiseSpec noise_sd;
    NoiseShape noise_shape = NoiseShape::gaussian;

    std::size_t k() const;
    void validate() const;  // throws ValidationError with a field path

    bool linear_means() const;
    bool constant_noise() const;

    // Per-coordinate moments of the covariate law.
    std::vector<double> covariate_means() const;
    std::vector<double> covariate_variances() const;
    double coordinate_mgf(std::size_t j, double t) const;
    // Support bounds, used by the variance-function positivity probe.
    void coordinate_bounds(std::size_t j, double& lo, double& hi) const;

    // E m(W) for a catalogue form under this covariate law (analytic).
    double expected_mean(const MeanForm& form) const;
    // Average treatment effect Δ = E m1(W) - E m0(W).
    double delta() const { return expected_mean(m1) - expected_mean(m0); }

    // Noise standard deviation at covariate value w for the given arm.
    double noise_sd_at(int arm, std::span<const double> w) const;

    // One covariate draw (k values appended in coordinate order).
    void sample_covariate_row(RandomStream& stream, std::span<double> out) const;
    // One noise draw with the configured shape, scaled to standard deviation sd.
    double sample_noise(RandomStream& stream, double sd) const;
};

nlohmann::json dgp_to_json(const DgpSpec& spec);
DgpSpec dgp_from_json(const nlohmann::json& j);
DgpSpec load_dgp(const std::filesystem::path& path);

}  // namespace ancova
