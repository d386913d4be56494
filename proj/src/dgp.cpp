// dgp.cpp — validation, moments, sampling, and JSON for DgpSpec.

#include "ancova/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ancova/errors.hpp"
#include "ancova/stats.hpp"

namespace ancova {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError("dgp: " + message);
}

// ---------------------------------------------------------------------------
// per-form helpers
// ---------------------------------------------------------------------------

std::size_t form_dimension(const MeanForm& form) {
    return std::visit([](const auto& f) -> std::size_t {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialBoundedMean>) return f.scale.size();
        else return f.slopes.size();
    }, form);
}

void validate_form(const MeanForm& form, std::size_t k, const std::string& path) {
    std::visit([&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        require(std::isfinite(f.intercept), path + ".intercept must be finite");
        if constexpr (std::is_same_v<T, LinearMean>) {
            require(f.slopes.size() == k, path + ".slopes must have k entries");
        } else if constexpr (std::is_same_v<T, QuadraticMean>) {
            require(f.slopes.size() == k, path + ".slopes must have k entries");
            require(f.quad.size() == k, path + ".quad must have k entries");
        } else if constexpr (std::is_same_v<T, InteractionMean>) {
            require(f.slopes.size() == k, path + ".slopes must have k entries");
            require(k >= 2, path + ": interaction form needs k >= 2");
            require(std::isfinite(f.pair_coefficient), path + ".pair_coefficient must be finite");
        } else {
            require(f.scale.size() == k, path + ".scale must have k entries");
            require(f.rate.size() == k, path + ".rate must have k entries");
        }
    }, form);
}

// Exact minimum of a catalogue form over the covariate box. Forms are
// separable per coordinate apart from the single bilinear interaction term,
// so coordinate-wise closed forms (plus the four (w1,w2) corners) suffice.
double min_over_box(const MeanForm& form, std::span<const double> lo,
                    std::span<const double> hi) {
    const std::size_t k = lo.size();
    return std::visit([&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        double total = f.intercept;
        if constexpr (std::is_same_v<T, LinearMean>) {
            for (std::size_t j = 0; j < k; ++j)
                total += std::min(f.slopes[j] * lo[j], f.slopes[j] * hi[j]);
        } else if constexpr (std::is_same_v<T, QuadraticMean>) {
            for (std::size_t j = 0; j < k; ++j) {
                const double b = f.slopes[j], q = f.quad[j];
                double m = std::min(b * lo[j] + q * lo[j] * lo[j],
                                    b * hi[j] + q * hi[j] * hi[j]);
                if (q != 0.0) {
                    const double vertex = -b / (2.0 * q);
                    if (vertex > lo[j] && vertex < hi[j])
                        m = std::min(m, b * vertex + q * vertex * vertex);
                }
                total += m;
            }
        } else if constexpr (std::is_same_v<T, InteractionMean>) {
            double pair_min = std::numeric_limits<double>::infinity();
            for (double w1 : {lo[0], hi[0]})
                for (double w2 : {lo[1], hi[1]})
                    pair_min = std::min(pair_min, f.slopes[0] * w1 + f.slopes[1] * w2 +
                                                      f.pair_coefficient * w1 * w2);
            total += pair_min;
            for (std::size_t j = 2; j < k; ++j)
                total += std::min(f.slopes[j] * lo[j], f.slopes[j] * hi[j]);
        } else {
            for (std::size_t j = 0; j < k; ++j) {
                const double c = f.scale[j], d = f.rate[j];
                auto value = [&](double w) { return c * std::exp(d * w); };
                double m = std::min(value(lo[j]), value(hi[j]));
                total += m;
            }
        }
        return total;
    }, form);
}

}  // namespace

double evaluate_mean(const MeanForm& form, std::span<const double> w) {
    return std::visit([&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        double value = f.intercept;
        if constexpr (std::is_same_v<T, ExponentialBoundedMean>) {
            for (std::size_t j = 0; j < f.scale.size(); ++j)
                value += f.scale[j] * std::exp(f.rate[j] * w[j]);
        } else {
            for (std::size_t j = 0; j < f.slopes.size(); ++j) value += f.slopes[j] * w[j];
            if constexpr (std::is_same_v<T, QuadraticMean>) {
                for (std::size_t j = 0; j < f.quad.size(); ++j)
                    value += f.quad[j] * w[j] * w[j];
            } else if constexpr (std::is_same_v<T, InteractionMean>) {
                value += f.pair_coefficient * w[0] * w[1];
            }
        }
        return value;
    }, form);
}

std::size_t DgpSpec::k() const {
    return std::visit([](const auto& law) -> std::size_t {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformLaw>) return law.a.size();
        else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) return law.mu.size();
        else return law.support.size();
    }, covariate_law);
}

bool DgpSpec::linear_means() const {
    return std::holds_alternative<LinearMean>(m1) && std::holds_alternative<LinearMean>(m0);
}

bool DgpSpec::constant_noise() const {
    return std::holds_alternative<ConstantNoise>(noise_sd);
}

void DgpSpec::coordinate_bounds(std::size_t j, double& lo, double& hi) const {
    std::visit([&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformLaw>) {
            lo = law.a[j];
            hi = law.b[j];
        } else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) {
            lo = law.lower[j];
            hi = law.upper[j];
        } else {
            lo = *std::min_element(law.support[j].begin(), law.support[j].end());
            hi = *std::max_element(law.support[j].begin(), law.support[j].end());
        }
    }, covariate_law);
}

void DgpSpec::validate() const {
    require(pi > 0.0 && pi < 1.0, "pi must lie strictly in (0,1)");
    const std::size_t dim = k();

    std::visit([&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformLaw>) {
            require(law.b.size() == dim, "covariate_law.b must match covariate_law.a");
            for (std::size_t j = 0; j < dim; ++j) {
                require(std::isfinite(law.a[j]) && std::isfinite(law.b[j]),
                        "covariate_law bounds must be finite (bounded covariates)");
                require(law.a[j] < law.b[j], "covariate_law.a[" + std::to_string(j) +
                                                 "] must be below covariate_law.b[" +
                                                 std::to_string(j) + "]");
            }
        } else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) {
            require(law.sigma.size() == dim && law.lower.size() == dim && law.upper.size() == dim,
                    "covariate_law: mu, sigma, lower, upper must have equal length");
            for (std::size_t j = 0; j < dim; ++j) {
                require(std::isfinite(law.lower[j]) && std::isfinite(law.upper[j]),
                        "covariate_law truncation bounds must be finite (bounded covariates)");
                require(law.sigma[j] > 0.0, "covariate_law.sigma[" + std::to_string(j) +
                                                "] must be positive");
                require(law.lower[j] < law.upper[j], "covariate_law.lower[" + std::to_string(j) +
                                                         "] must be below upper");
                const double alpha = (law.lower[j] - law.mu[j]) / law.sigma[j];
                const double beta = (law.upper[j] - law.mu[j]) / law.sigma[j];
                require(stats::norm_cdf(beta) - stats::norm_cdf(alpha) > 1e-12,
                        "covariate_law: truncation interval carries no probability mass at "
                        "coordinate " + std::to_string(j));
            }
        } else {
            require(law.probabilities.size() == dim,
                    "covariate_law.probabilities must match covariate_law.support");
            for (std::size_t j = 0; j < dim; ++j) {
                const auto& sup = law.support[j];
                const auto& prob = law.probabilities[j];
                require(!sup.empty(), "covariate_law.support[" + std::to_string(j) +
                                          "] must be non-empty");
                require(sup.size() == prob.size(), "covariate_law: support and probabilities "
                                                   "must match at coordinate " + std::to_string(j));
                double total = 0.0;
                for (std::size_t t = 0; t < sup.size(); ++t) {
                    require(std::isfinite(sup[t]), "covariate_law.support values must be finite");
                    require(prob[t] >= 0.0, "covariate_law.probabilities must be non-negative");
                    total += prob[t];
                }
                require(std::fabs(total - 1.0) <= 1e-9,
                        "covariate_law.probabilities[" + std::to_string(j) + "] must sum to 1");
            }
        }
    }, covariate_law);

    validate_form(m1, dim, "arm_mean.m1");
    validate_form(m0, dim, "arm_mean.m0");

    std::visit([&](const auto& noise) {
        using T = std::decay_t<decltype(noise)>;
        if constexpr (std::is_same_v<T, ConstantNoise>) {
            require(noise.sigma1 >= 0.0 && std::isfinite(noise.sigma1),
                    "noise_sd.sigma1 must be finite and >= 0");
            require(noise.sigma0 >= 0.0 && std::isfinite(noise.sigma0),
                    "noise_sd.sigma0 must be finite and >= 0");
        } else {
            validate_form(noise.v1, dim, "noise_sd.v1");
            validate_form(noise.v0, dim, "noise_sd.v0");
            std::vector<double> lo(dim), hi(dim);
            for (std::size_t j = 0; j < dim; ++j) coordinate_bounds(j, lo[j], hi[j]);
            require(min_over_box(noise.v1, lo, hi) >= 0.0,
                    "noise_sd.v1 is negative somewhere on the covariate support");
            require(min_over_box(noise.v0, lo, hi) >= 0.0,
                    "noise_sd.v0 is negative somewhere on the covariate support");
        }
    }, noise_sd);
}

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

std::vector<double> DgpSpec::covariate_means() const {
    const std::size_t dim = k();
    std::vector<double> means(dim);
    std::visit([&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        for (std::size_t j = 0; j < dim; ++j) {
            if constexpr (std::is_same_v<T, UniformLaw>) {
                means[j] = 0.5 * (law.a[j] + law.b[j]);
            } else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) {
                const double alpha = (law.lower[j] - law.mu[j]) / law.sigma[j];
                const double beta = (law.upper[j] - law.mu[j]) / law.sigma[j];
                const double z = stats::norm_cdf(beta) - stats::norm_cdf(alpha);
                means[j] = law.mu[j] +
                           law.sigma[j] * (stats::norm_pdf(alpha) - stats::norm_pdf(beta)) / z;
            } else {
                double m = 0.0;
                for (std::size_t t = 0; t < law.support[j].size(); ++t)
                    m += law.support[j][t] * law.probabilities[j][t];
                means[j] = m;
            }
        }
    }, covariate_law);
    return means;
}

std::vector<double> DgpSpec::covariate_variances() const {
    const std::size_t dim = k();
    std::vector<double> variances(dim);
    std::visit([&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        for (std::size_t j = 0; j < dim; ++j) {
            if constexpr (std::is_same_v<T, UniformLaw>) {
                const double width = law.b[j] - law.a[j];
                variances[j] = width * width / 12.0;
            } else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) {
                const double alpha = (law.lower[j] - law.mu[j]) / law.sigma[j];
                const double beta = (law.upper[j] - law.mu[j]) / law.sigma[j];
                const double z = stats::norm_cdf(beta) - stats::norm_cdf(alpha);
                const double pa = stats::norm_pdf(alpha);
                const double pb = stats::norm_pdf(beta);
                const double ratio = (pa - pb) / z;
                variances[j] = law.sigma[j] * law.sigma[j] *
                               (1.0 + (alpha * pa - beta * pb) / z - ratio * ratio);
            } else {
                double m = 0.0, m2 = 0.0;
                for (std::size_t t = 0; t < law.support[j].size(); ++t) {
                    m += law.support[j][t] * law.probabilities[j][t];
                    m2 += law.support[j][t] * law.support[j][t] * law.probabilities[j][t];
                }
                variances[j] = m2 - m * m;
            }
        }
    }, covariate_law);
    return variances;
}

double DgpSpec::coordinate_mgf(std::size_t j, double t) const {
    return std::visit([&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformLaw>) {
            const double a = law.a[j], b = law.b[j];
            if (t == 0.0) return 1.0;
            return (std::exp(t * b) - std::exp(t * a)) / (t * (b - a));
        } else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) {
            const double mu = law.mu[j], sigma = law.sigma[j];
            const double alpha = (law.lower[j] - mu) / sigma;
            const double beta = (law.upper[j] - mu) / sigma;
            const double z = stats::norm_cdf(beta) - stats::norm_cdf(alpha);
            return std::exp(mu * t + 0.5 * sigma * sigma * t * t) *
                   (stats::norm_cdf(beta - sigma * t) - stats::norm_cdf(alpha - sigma * t)) / z;
        } else {
            double m = 0.0;
            for (std::size_t s = 0; s < law.support[j].size(); ++s)
                m += law.probabilities[j][s] * std::exp(t * law.support[j][s]);
            return m;
        }
    }, covariate_law);
}

double DgpSpec::expected_mean(const MeanForm& form) const {
    const auto means = covariate_means();
    return std::visit([&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        double value = f.intercept;
        if constexpr (std::is_same_v<T, ExponentialBoundedMean>) {
            for (std::size_t j = 0; j < f.scale.size(); ++j)
                value += f.scale[j] * coordinate_mgf(j, f.rate[j]);
        } else {
            for (std::size_t j = 0; j < f.slopes.size(); ++j) value += f.slopes[j] * means[j];
            if constexpr (std::is_same_v<T, QuadraticMean>) {
                const auto variances = covariate_variances();
                for (std::size_t j = 0; j < f.quad.size(); ++j)
                    value += f.quad[j] * (variances[j] + means[j] * means[j]);
            } else if constexpr (std::is_same_v<T, InteractionMean>) {
                // independent coordinates
                value += f.pair_coefficient * means[0] * means[1];
            }
        }
        return value;
    }, form);
}

double DgpSpec::noise_sd_at(int arm, std::span<const double> w) const {
    return std::visit([&](const auto& noise) -> double {
        using T = std::decay_t<decltype(noise)>;
        if constexpr (std::is_same_v<T, ConstantNoise>) {
            return arm == 1 ? noise.sigma1 : noise.sigma0;
        } else {
            const double v = evaluate_mean(arm == 1 ? noise.v1 : noise.v0, w);
            if (v < 0.0) {
                throw NumericalError("dgp: noise variance function negative at a sampled W");
            }
            return std::sqrt(v);
        }
    }, noise_sd);
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

void DgpSpec::sample_covariate_row(RandomStream& stream, std::span<double> out) const {
    std::visit([&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double u = stream.next_u01();
            if constexpr (std::is_same_v<T, UniformLaw>) {
                out[j] = law.a[j] + u * (law.b[j] - law.a[j]);
            } else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) {
                const double mu = law.mu[j], sigma = law.sigma[j];
                const double alpha = (law.lower[j] - mu) / sigma;
                const double beta = (law.upper[j] - mu) / sigma;
                const double ca = stats::norm_cdf(alpha);
                const double cb = stats::norm_cdf(beta);
                double p = ca + u * (cb - ca);
                p = std::clamp(p, 1e-300, 1.0 - 1e-16);
                const double x = mu + sigma * stats::norm_quantile(p);
                out[j] = std::clamp(x, law.lower[j], law.upper[j]);
            } else {
                const auto& prob = law.probabilities[j];
                double cum = 0.0;
                std::size_t pick = prob.size() - 1;
                for (std::size_t t = 0; t < prob.size(); ++t) {
                    cum += prob[t];
                    if (u < cum) {
                        pick = t;
                        break;
                    }
                }
                out[j] = law.support[j][pick];
            }
        }
    }, covariate_law);
}

double DgpSpec::sample_noise(RandomStream& stream, double sd) const {
    switch (noise_shape) {
        case NoiseShape::gaussian:
            return sd * stream.next_normal();
        case NoiseShape::centered_uniform:
            // uniform on [-√3 sd, √3 sd] has standard deviation sd
            return sd * 1.7320508075688772 * (2.0 * stream.next_u01() - 1.0);
        case NoiseShape::centered_two_point:
            return stream.next_u01() < 0.5 ? -sd : sd;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::json mean_form_to_json(const MeanForm& form) {
    nlohmann::json j;
    std::visit([&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        j["intercept"] = f.intercept;
        if constexpr (std::is_same_v<T, LinearMean>) {
            j["type"] = "linear";
            j["slopes"] = f.slopes;
        } else if constexpr (std::is_same_v<T, QuadraticMean>) {
            j["type"] = "quadratic";
            j["slopes"] = f.slopes;
            j["quad"] = f.quad;
        } else if constexpr (std::is_same_v<T, InteractionMean>) {
            j["type"] = "interaction";
            j["slopes"] = f.slopes;
            j["pair_coefficient"] = f.pair_coefficient;
        } else {
            j["type"] = "exponential_bounded";
            j["scale"] = f.scale;
            j["rate"] = f.rate;
        }
    }, form);
    return j;
}

template <typename T>
T field(const nlohmann::json& j, const std::string& name, const std::string& path) {
    if (!j.contains(name)) throw ValidationError("dgp json: missing field " + path + "." + name);
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("dgp json: field " + path + "." + name + " has the wrong type");
    }
}

MeanForm mean_form_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError("dgp json: " + path + " must be an object");
    const auto type = field<std::string>(j, "type", path);
    if (type == "linear") {
        LinearMean f;
        f.intercept = field<double>(j, "intercept", path);
        f.slopes = field<std::vector<double>>(j, "slopes", path);
        return f;
    }
    if (type == "quadratic") {
        QuadraticMean f;
        f.intercept = field<double>(j, "intercept", path);
        f.slopes = field<std::vector<double>>(j, "slopes", path);
        f.quad = field<std::vector<double>>(j, "quad", path);
        return f;
    }
    if (type == "interaction") {
        InteractionMean f;
        f.intercept = field<double>(j, "intercept", path);
        f.slopes = field<std::vector<double>>(j, "slopes", path);
        f.pair_coefficient = field<double>(j, "pair_coefficient", path);
        return f;
    }
    if (type == "exponential_bounded") {
        ExponentialBoundedMean f;
        f.intercept = field<double>(j, "intercept", path);
        f.scale = field<std::vector<double>>(j, "scale", path);
        f.rate = field<std::vector<double>>(j, "rate", path);
        return f;
    }
    throw ValidationError("dgp json: " + path + ".type must be one of linear, quadratic, "
                          "interaction, exponential_bounded");
}

}  // namespace

nlohmann::json dgp_to_json(const DgpSpec& spec) {
    nlohmann::json j;
    j["pi"] = spec.pi;

    nlohmann::json law;
    std::visit([&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, UniformLaw>) {
            law["type"] = "uniform";
            law["a"] = l.a;
            law["b"] = l.b;
        } else if constexpr (std::is_same_v<T, TruncatedNormalLaw>) {
            law["type"] = "truncated_normal";
            law["mu"] = l.mu;
            law["sigma"] = l.sigma;
            law["lower"] = l.lower;
            law["upper"] = l.upper;
        } else {
            law["type"] = "discrete";
            law["support"] = l.support;
            law["probabilities"] = l.probabilities;
        }
    }, spec.covariate_law);
    j["covariate_law"] = law;

    j["arm_mean"] = {{"m1", mean_form_to_json(spec.m1)}, {"m0", mean_form_to_json(spec.m0)}};

    nlohmann::json noise;
    std::visit([&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNoise>) {
            noise["type"] = "constant";
            noise["sigma1"] = n.sigma1;
            noise["sigma0"] = n.sigma0;
        } else {
            noise["type"] = "function";
            noise["v1"] = mean_form_to_json(n.v1);
            noise["v0"] = mean_form_to_json(n.v0);
        }
    }, spec.noise_sd);
    j["noise_sd"] = noise;

    switch (spec.noise_shape) {
        case NoiseShape::gaussian: j["noise_shape"] = "gaussian"; break;
        case NoiseShape::centered_uniform: j["noise_shape"] = "centered_uniform"; break;
        case NoiseShape::centered_two_point: j["noise_shape"] = "centered_two_point"; break;
    }
    return j;
}

DgpSpec dgp_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("dgp json: document must be an object");
    DgpSpec spec;
    spec.pi = field<double>(j, "pi", "$");

    if (!j.contains("covariate_law"))
        throw ValidationError("dgp json: missing field $.covariate_law");
    const auto& law = j.at("covariate_law");
    const auto law_type = field<std::string>(law, "type", "$.covariate_law");
    if (law_type == "uniform") {
        UniformLaw l;
        l.a = field<std::vector<double>>(law, "a", "$.covariate_law");
        l.b = field<std::vector<double>>(law, "b", "$.covariate_law");
        spec.covariate_law = std::move(l);
    } else if (law_type == "truncated_normal") {
        TruncatedNormalLaw l;
        l.mu = field<std::vector<double>>(law, "mu", "$.covariate_law");
        l.sigma = field<std::vector<double>>(law, "sigma", "$.covariate_law");
        l.lower = field<std::vector<double>>(law, "lower", "$.covariate_law");
        l.upper = field<std::vector<double>>(law, "upper", "$.covariate_law");
        spec.covariate_law = std::move(l);
    } else if (law_type == "discrete") {
        DiscreteLaw l;
        l.support = field<std::vector<std::vector<double>>>(law, "support", "$.covariate_law");
        l.probabilities =
            field<std::vector<std::vector<double>>>(law, "probabilities", "$.covariate_law");
        spec.covariate_law = std::move(l);
    } else {
        throw ValidationError("dgp json: $.covariate_law.type must be one of uniform, "
                              "truncated_normal, discrete");
    }

    if (!j.contains("arm_mean")) throw ValidationError("dgp json: missing field $.arm_mean");
    const auto& mean = j.at("arm_mean");
    if (!mean.contains("m1") || !mean.contains("m0"))
        throw ValidationError("dgp json: $.arm_mean needs fields m1 and m0");
    spec.m1 = mean_form_from_json(mean.at("m1"), "$.arm_mean.m1");
    spec.m0 = mean_form_from_json(mean.at("m0"), "$.arm_mean.m0");

    if (!j.contains("noise_sd")) throw ValidationError("dgp json: missing field $.noise_sd");
    const auto& noise = j.at("noise_sd");
    const auto noise_type = field<std::string>(noise, "type", "$.noise_sd");
    if (noise_type == "constant") {
        ConstantNoise n;
        n.sigma1 = field<double>(noise, "sigma1", "$.noise_sd");
        n.sigma0 = field<double>(noise, "sigma0", "$.noise_sd");
        spec.noise_sd = n;
    } else if (noise_type == "function") {
        FunctionNoise n;
        n.v1 = mean_form_from_json(noise.at("v1"), "$.noise_sd.v1");
        n.v0 = mean_form_from_json(noise.at("v0"), "$.noise_sd.v0");
        spec.noise_sd = std::move(n);
    } else {
        throw ValidationError("dgp json: $.noise_sd.type must be constant or function");
    }

    const auto shape = field<std::string>(j, "noise_shape", "$");
    if (shape == "gaussian") spec.noise_shape = NoiseShape::gaussian;
    else if (shape == "centered_uniform") spec.noise_shape = NoiseShape::centered_uniform;
    else if (shape == "centered_two_point") spec.noise_shape = NoiseShape::centered_two_point;
    else throw ValidationError("dgp json: $.noise_shape must be gaussian, centered_uniform, "
                               "or centered_two_point");

    spec.validate();
    return spec;
}

DgpSpec load_dgp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("dgp: cannot open file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("dgp: invalid JSON in " + path.string() + ": " + e.what());
    }
    return dgp_from_json(j);
}

}  // namespace ancova
