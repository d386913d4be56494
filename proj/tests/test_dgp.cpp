// test_dgp.cpp — DGP validation, moments, sampling, JSON round trips.

#include <doctest.h>

#include <cmath>
#include <functional>

#include "ancova/dgp.hpp"
#include "ancova/errors.hpp"
#include "ancova/stats.hpp"

using namespace ancova;

namespace {

DgpSpec uniform_linear_spec(double pi, double b1, double b0, double s1, double s0) {
    DgpSpec spec;
    spec.pi = pi;
    const double root3 = 1.7320508075688772;
    spec.covariate_law = UniformLaw{{-root3}, {root3}};
    spec.m1 = LinearMean{0.0, {b1}};
    spec.m0 = LinearMean{0.0, {b0}};
    spec.noise_sd = ConstantNoise{s1, s0};
    spec.noise_shape = NoiseShape::gaussian;
    return spec;
}

// Simpson quadrature for the truncated-normal moment checks.
double simpson(const std::function<double(double)>& f, double lo, double hi, int cells = 20000) {
    const double h = (hi - lo) / cells;
    double total = f(lo) + f(hi);
    for (int i = 1; i < cells; ++i) total += f(lo + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    return total * h / 3.0;
}

}  // namespace

TEST_CASE("validation rejects bad specs with field paths") {
    auto spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.pi = 1.0;
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("pi"), ValidationError);

    spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, -0.2);
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("sigma0"), ValidationError);

    spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.covariate_law = UniformLaw{{0.0}, {0.0}};
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("covariate_law"), ValidationError);

    // unbounded laws are rejected outright
    spec.covariate_law = UniformLaw{{0.0}, {std::numeric_limits<double>::infinity()}};
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("finite"), ValidationError);

    spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.m1 = InteractionMean{0.0, {1.0}, 0.5};
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("k >= 2"), ValidationError);

    spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.m1 = LinearMean{0.0, {1.0, 2.0}};  // wrong dimension
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("slopes"), ValidationError);

    DgpSpec discrete = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    discrete.covariate_law = DiscreteLaw{{{0.0, 1.0}}, {{0.6, 0.6}}};
    CHECK_THROWS_WITH_AS(discrete.validate(), doctest::Contains("sum to 1"), ValidationError);

    // variance function that dips negative on the support
    DgpSpec fnoise = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    fnoise.noise_sd = FunctionNoise{LinearMean{0.5, {1.0}}, LinearMean{1.0, {0.0}}};
    CHECK_THROWS_WITH_AS(fnoise.validate(), doctest::Contains("negative"), ValidationError);

    // same shape shifted up is fine
    fnoise.noise_sd = FunctionNoise{LinearMean{2.0, {1.0}}, LinearMean{1.0, {0.0}}};
    CHECK_NOTHROW(fnoise.validate());
}

TEST_CASE("uniform law moments and mgf") {
    const auto spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    CHECK(spec.covariate_means()[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(spec.covariate_variances()[0] == doctest::Approx(1.0).epsilon(1e-14));
    // E exp(tW) for U(-a, a) = sinh(t a)/(t a)
    const double a = 1.7320508075688772;
    for (double t : {-1.3, -0.2, 0.4, 1.0}) {
        CHECK(spec.coordinate_mgf(0, t) ==
              doctest::Approx(std::sinh(t * a) / (t * a)).epsilon(1e-12));
    }
    CHECK(spec.coordinate_mgf(0, 0.0) == 1.0);
}

TEST_CASE("truncated normal moments match quadrature") {
    DgpSpec spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.covariate_law = TruncatedNormalLaw{{0.5}, {1.2}, {-1.0}, {2.5}};
    spec.validate();

    const double mu = 0.5, sigma = 1.2, lo = -1.0, hi = 2.5;
    auto density = [&](double x) {
        return stats::norm_pdf((x - mu) / sigma) / sigma;
    };
    const double mass = simpson(density, lo, hi);
    const double mean = simpson([&](double x) { return x * density(x); }, lo, hi) / mass;
    const double second = simpson([&](double x) { return x * x * density(x); }, lo, hi) / mass;

    CHECK(spec.covariate_means()[0] == doctest::Approx(mean).epsilon(1e-9));
    CHECK(spec.covariate_variances()[0] ==
          doctest::Approx(second - mean * mean).epsilon(1e-8));

    const double t = 0.7;
    const double mgf = simpson([&](double x) { return std::exp(t * x) * density(x); }, lo, hi) /
                       mass;
    CHECK(spec.coordinate_mgf(0, t) == doctest::Approx(mgf).epsilon(1e-9));
}

TEST_CASE("discrete law moments") {
    DgpSpec spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.covariate_law = DiscreteLaw{{{-1.0, 0.0, 2.0}}, {{0.25, 0.5, 0.25}}};
    spec.validate();
    CHECK(spec.covariate_means()[0] == doctest::Approx(0.25));
    CHECK(spec.covariate_variances()[0] == doctest::Approx(0.25 + 1.0 - 0.0625));
    CHECK(spec.coordinate_mgf(0, 0.3) ==
          doctest::Approx(0.25 * std::exp(-0.3) + 0.5 + 0.25 * std::exp(0.6)).epsilon(1e-14));
}

TEST_CASE("delta is analytic for every catalogue form") {
    DgpSpec spec = uniform_linear_spec(0.6, 2.0, 0.5, 1.0, 1.0);
    CHECK(spec.delta() == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

    // quadratic: E W² enters
    spec.m1 = QuadraticMean{1.0, {1.0}, {0.5}};
    spec.m0 = LinearMean{0.0, {1.0}};
    CHECK(spec.delta() == doctest::Approx(1.0 + 0.5 * 1.0).epsilon(1e-12));

    // exponential: MGF enters
    spec.m1 = ExponentialBoundedMean{0.0, {2.0}, {0.4}};
    spec.m0 = LinearMean{0.0, {0.0}};
    const double a = 1.7320508075688772;
    CHECK(spec.delta() ==
          doctest::Approx(2.0 * std::sinh(0.4 * a) / (0.4 * a)).epsilon(1e-12));

    // interaction needs two coordinates; with centered W the product term drops
    DgpSpec two = spec;
    two.covariate_law = UniformLaw{{-1.0, 0.0}, {1.0, 2.0}};
    two.m1 = InteractionMean{0.5, {1.0, 1.0}, 3.0};
    two.m0 = LinearMean{0.0, {0.0, 0.0}};
    // E m1 = 0.5 + 1·0 + 1·1 + 3·0·1 = 1.5
    CHECK(two.delta() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("sampling respects bounds and matches law moments") {
    DgpSpec spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.covariate_law = TruncatedNormalLaw{{0.0}, {1.0}, {-0.8}, {1.7}};
    spec.validate();

    RandomStream stream(77, 0, StreamTag::covariates);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> w(1);
    for (int i = 0; i < n; ++i) {
        spec.sample_covariate_row(stream, w);
        CHECK(w[0] >= -0.8);
        CHECK(w[0] <= 1.7);
        sum += w[0];
        sumsq += w[0] * w[0];
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(spec.covariate_means()[0]).epsilon(0.02));
    CHECK(var == doctest::Approx(spec.covariate_variances()[0]).epsilon(0.03));
}

TEST_CASE("discrete sampling hits only the atoms with the right frequencies") {
    DgpSpec spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.covariate_law = DiscreteLaw{{{-1.0, 0.5, 3.0}}, {{0.2, 0.5, 0.3}}};
    spec.validate();
    RandomStream stream(901, 0, StreamTag::covariates);
    std::vector<double> w(1);
    int counts[3] = {0, 0, 0};
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
        spec.sample_covariate_row(stream, w);
        if (w[0] == -1.0) ++counts[0];
        else if (w[0] == 0.5) ++counts[1];
        else if (w[0] == 3.0) ++counts[2];
        else FAIL("sample off the support");
    }
    CHECK(counts[0] / static_cast<double>(n) == doctest::Approx(0.2).epsilon(0.05));
    CHECK(counts[1] / static_cast<double>(n) == doctest::Approx(0.5).epsilon(0.05));
    CHECK(counts[2] / static_cast<double>(n) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("noise shapes share the requested standard deviation") {
    DgpSpec spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    const double sd = 1.7;
    for (auto shape : {NoiseShape::gaussian, NoiseShape::centered_uniform,
                       NoiseShape::centered_two_point}) {
        spec.noise_shape = shape;
        RandomStream stream(55, static_cast<std::uint64_t>(shape), StreamTag::noise);
        double sum = 0.0, sumsq = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double e = spec.sample_noise(stream, sd);
            sum += e;
            sumsq += e * e;
            if (shape == NoiseShape::centered_two_point) CHECK(std::fabs(e) == sd);
            if (shape == NoiseShape::centered_uniform)
                CHECK(std::fabs(e) <= sd * 1.7320508075688772 + 1e-12);
        }
        CHECK(sum / n == doctest::Approx(0.0).scale(sd).epsilon(0.02));
        CHECK(sumsq / n == doctest::Approx(sd * sd).epsilon(0.02));
    }
}

TEST_CASE("function noise evaluates per arm") {
    DgpSpec spec = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    spec.noise_sd = FunctionNoise{QuadraticMean{1.0, {0.0}, {1.0}}, LinearMean{4.0, {0.0}}};
    spec.validate();
    const double w[] = {0.5};
    CHECK(spec.noise_sd_at(1, w) == doctest::Approx(std::sqrt(1.25)));
    CHECK(spec.noise_sd_at(0, w) == doctest::Approx(2.0));
    CHECK(spec.constant_noise() == false);
}

TEST_CASE("json round trip preserves every law and form") {
    std::vector<DgpSpec> specs;
    specs.push_back(uniform_linear_spec(0.7, 2.0, 0.5, 1.0, 1.0));

    DgpSpec truncated = uniform_linear_spec(0.3, 1.0, 0.0, 0.5, 2.0);
    truncated.covariate_law = TruncatedNormalLaw{{0.1}, {0.9}, {-2.0}, {2.0}};
    truncated.noise_shape = NoiseShape::centered_uniform;
    specs.push_back(truncated);

    DgpSpec discrete = uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0);
    discrete.covariate_law = DiscreteLaw{{{0.0, 1.0}}, {{0.5, 0.5}}};
    discrete.m1 = QuadraticMean{0.0, {1.0}, {0.25}};
    discrete.m0 = ExponentialBoundedMean{0.0, {1.0}, {0.3}};
    discrete.noise_sd = FunctionNoise{LinearMean{1.0, {0.5}}, LinearMean{2.0, {0.0}}};
    discrete.noise_shape = NoiseShape::centered_two_point;
    specs.push_back(discrete);

    DgpSpec pair = uniform_linear_spec(0.4, 0.0, 0.0, 1.0, 1.0);
    pair.covariate_law = UniformLaw{{-1.0, -1.0}, {1.0, 1.0}};
    pair.m1 = InteractionMean{0.0, {1.0, -1.0}, 0.8};
    pair.m0 = LinearMean{0.0, {0.5, 0.5}};
    specs.push_back(pair);

    for (const auto& spec : specs) {
        const auto j = dgp_to_json(spec);
        const DgpSpec back = dgp_from_json(j);
        CHECK(dgp_to_json(back) == j);
        CHECK(back.delta() == doctest::Approx(spec.delta()).scale(1.0).epsilon(1e-14));
    }
}

TEST_CASE("json errors carry a field path") {
    CHECK_THROWS_WITH_AS(dgp_from_json(nlohmann::json::parse("{}")),
                         doctest::Contains("$.pi"), ValidationError);
    CHECK_THROWS_WITH_AS(
        dgp_from_json(nlohmann::json::parse(R"({"pi": 0.5, "covariate_law": {"type": "beta"}})")),
        doctest::Contains("covariate_law.type"), ValidationError);
    auto doc = dgp_to_json(uniform_linear_spec(0.5, 1.0, 1.0, 1.0, 1.0));
    doc["arm_mean"]["m1"].erase("slopes");
    CHECK_THROWS_WITH_AS(dgp_from_json(doc), doctest::Contains("$.arm_mean.m1.slopes"),
                         ValidationError);
}
