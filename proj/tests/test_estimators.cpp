// test_estimators.cpp — point estimates, variance estimators, Wald tests.
//
// Worked 6-row values: OLS beta = (-0.5, 2, 1.25), residuals (-.25,0,.25,
// .25,0,-.25), RSS = 0.25. Model-based variance 0.25/5 / (5·0.3) = 1/30;
// classical (0.25/3)/1.5 = 1/18 (ratio 3/5 = (n-k-2)/(n-1)); influence sum
// 4·RSS = 1 so sandwich_none = 1/36; Welch 2.25/3 + 1/3 = 13/12.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ancova/errors.hpp"
#include "ancova/estimators.hpp"
#include "ancova/linalg.hpp"
#include "ancova/stats.hpp"
#include "test_helpers.hpp"

using namespace ancova;

namespace {

// Independent route for the model-based variance: RSS / ((n-1)·AᵀMA) with M
// the explicit projection complement of [1, W].
double projection_route_variance(const TrialDataset& data, const AncovaFit& fit) {
    const std::size_t n = data.n();
    const std::size_t k = data.k();
    const std::size_t q = k + 1;

    Matrix z(n, q);
    for (std::size_t i = 0; i < n; ++i) z(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) z(i, j + 1) = data.covariates(i, j);

    Matrix ztz(q, q);
    std::vector<double> zta(q, 0.0);
    for (std::size_t r = 0; r < q; ++r) {
        for (std::size_t c = 0; c < q; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += z(i, r) * z(i, c);
            ztz(r, c) = s;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += z(i, r) * data.arms[i];
        zta[r] = s;
    }
    const auto coef = solve_spd(ztz, zta, "ZᵀZ");
    double ata = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) ata += static_cast<double>(data.arms[i]) * data.arms[i];
    for (std::size_t r = 0; r < q; ++r) quad += coef[r] * zta[r];
    const double atma = ata - quad;
    return fit.rss / (static_cast<double>(n - 1) * atma);
}

TrialDataset affine_transform(const TrialDataset& data, RandomStream& stream) {
    const std::size_t k = data.k();
    // B = L·D with unit lower-triangular L and diagonal d in [0.5, 2].
    Matrix b(k, k);
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < r; ++c) b(r, c) = stream.next_u01() - 0.5;
        b(r, r) = 0.5 + 1.5 * stream.next_u01();
    }
    std::vector<double> shift(k);
    for (auto& s : shift) s = 2.0 * stream.next_u01() - 1.0;

    TrialDataset out = data;
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t r = 0; r < k; ++r) {
            double v = shift[r];
            for (std::size_t c = 0; c <= r; ++c) v += b(r, c) * data.covariates(i, c);
            out.covariates(i, r) = v;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("unadjusted estimate") {
    TrialDataset data;
    data.outcomes = {3.0, 1.0};
    data.arms = {1, 0};
    CHECK(unadjusted_estimate(data) == doctest::Approx(2.0).epsilon(1e-15));

    TrialDataset same;
    same.outcomes = {5.0, 5.0, 5.0, 5.0};
    same.arms = {1, 0, 1, 0};
    CHECK(unadjusted_estimate(same) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("ancova fit with k=0 equals the unadjusted estimate") {
    TrialDataset data;
    data.outcomes = {3.0, 1.0, 2.0};
    data.arms = {1, 0, 1};
    const AncovaFit fit = ancova_fit(data);
    CHECK(fit.betaA == doctest::Approx(1.5).epsilon(1e-14));

    for (std::uint64_t unit = 0; unit < 200; ++unit) {
        testing::DatasetOptions options;
        options.max_k = 0;
        const TrialDataset random = testing::make_random_dataset(unit, options);
        const AncovaFit f = ancova_fit(random);
        const double unadj = unadjusted_estimate(random);
        CHECK(f.betaA == doctest::Approx(unadj).epsilon(1e-12));
    }
}

TEST_CASE("ancova fit interpolates a noiseless linear model") {
    TrialDataset data;
    data.outcomes.resize(12);
    data.arms = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    data.covariates = Matrix(12, 1);
    data.covariate_names = {"W1"};
    RandomStream stream(3, 0, StreamTag::generic);
    for (std::size_t i = 0; i < 12; ++i) {
        data.covariates(i, 0) = stream.next_u01();
        data.outcomes[i] = 1.0 + 2.0 * data.arms[i] + 3.0 * data.covariates(i, 0);
    }
    const AncovaFit fit = ancova_fit(data);
    CHECK(fit.beta0 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.betaA == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.betaW[0] == doctest::Approx(3.0).epsilon(1e-10));
    for (double r : fit.residuals) CHECK(std::fabs(r) < 1e-10);
}

TEST_CASE("ancova fit preconditions") {
    TrialDataset small;
    small.outcomes = {1.0, 2.0, 3.0};
    small.arms = {1, 0, 1};
    small.covariates = Matrix(3, 1);
    small.covariate_names = {"W1"};
    CHECK_THROWS_AS(ancova_fit(small), ValidationError);  // n < k+3

    TrialDataset constant_arm;
    constant_arm.outcomes = {1.0, 2.0, 3.0, 4.0};
    constant_arm.arms = {1, 1, 1, 1};
    CHECK_THROWS_AS(ancova_fit(constant_arm), ValidationError);
}

TEST_CASE("six-row worked example") {
    const TrialDataset data = testing::six_row_dataset();
    const AncovaFit fit = ancova_fit(data);
    CHECK(fit.beta0 == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fit.betaA == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.betaW[0] == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(fit.rss == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fit.pi_hat == doctest::Approx(0.5));

    CHECK(model_based_variance(data, fit).value ==
          doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    CHECK(model_based_classical(data, fit).value ==
          doctest::Approx(1.0 / 18.0).epsilon(1e-12));
    CHECK(sandwich_variance(data, fit, SandwichCorrection::none).value ==
          doctest::Approx(1.0 / 36.0).epsilon(1e-12));
    CHECK(sandwich_variance(data, fit, SandwichCorrection::df).value ==
          doctest::Approx(1.0 / 18.0).epsilon(1e-12));
    CHECK(welch_variance(data).value == doctest::Approx(13.0 / 12.0).epsilon(1e-12));

    // pooled t on balanced arms with equal within-arm spread
    const auto pooled = pooled_t_variance(data);
    const double s_pooled = (2.0 * 2.25 + 2.0 * 1.0) / 4.0;
    CHECK(pooled.value == doctest::Approx(s_pooled * (2.0 / 3.0)).epsilon(1e-12));
    CHECK(*pooled.dof_reference == doctest::Approx(4.0));
}

TEST_CASE("model-based variance equals the projection route") {
    for (std::uint64_t unit = 300; unit < 380; ++unit) {
        const TrialDataset data = testing::make_random_dataset(unit);
        const AncovaFit fit = ancova_fit(data);
        const double via_projection = projection_route_variance(data, fit);
        CHECK(model_based_variance(data, fit).value ==
              doctest::Approx(via_projection).epsilon(1e-9));
    }
}

TEST_CASE("dof ratio ties the two model-based variants") {
    for (std::uint64_t unit = 400; unit < 480; ++unit) {
        const TrialDataset data = testing::make_random_dataset(unit);
        const AncovaFit fit = ancova_fit(data);
        const double n = static_cast<double>(fit.n);
        const double k = static_cast<double>(fit.k);
        const double expected =
            model_based_classical(data, fit).value * (n - k - 2.0) / (n - 1.0);
        CHECK(model_based_variance(data, fit).value ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("paper and classical variants converge at large n") {
    testing::DatasetOptions options;
    options.min_n = 10000;
    options.max_n = 10000;
    options.max_k = 1;
    const TrialDataset data = testing::make_random_dataset(1, options);
    const AncovaFit fit = ancova_fit(data);
    const double paper = model_based_variance(data, fit).value;
    const double classical = model_based_classical(data, fit).value;
    CHECK(std::fabs(paper - classical) / classical < 1e-3);
}

TEST_CASE("empirical influence values") {
    const TrialDataset data = testing::six_row_dataset();
    const AncovaFit fit = ancova_fit(data);

    // pi_hat = 1/2 collapses the weight to ±2
    const auto inf = empirical_influence(data, fit);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double expected = 2.0 * (2.0 * data.arms[i] - 1.0) * fit.residuals[i];
        CHECK(inf[i] == doctest::Approx(expected).epsilon(1e-13));
    }

    // estimated-pi influence sums to zero exactly (per-arm residual sums vanish)
    for (std::uint64_t unit = 500; unit < 560; ++unit) {
        const TrialDataset random = testing::make_random_dataset(unit);
        const AncovaFit f = ancova_fit(random);
        const auto values = empirical_influence(random, f);
        double total = 0.0, scale = 0.0;
        for (double v : values) {
            total += v;
            scale += std::fabs(v);
        }
        CHECK(std::fabs(total) <= 1e-8 * std::max(scale, 1e-12));
    }

    CHECK_THROWS_AS(empirical_influence(data, fit, PiSource::design, 1.5), ValidationError);
}

TEST_CASE("zero-noise data gives zero influence and zero sandwich") {
    TrialDataset data;
    data.outcomes.resize(10);
    data.arms = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    for (std::size_t i = 0; i < 10; ++i) data.outcomes[i] = 1.0 + 2.0 * data.arms[i];
    const AncovaFit fit = ancova_fit(data);
    for (double v : empirical_influence(data, fit)) CHECK(std::fabs(v) < 1e-12);
    CHECK(sandwich_variance(data, fit).value < 1e-24);
}

TEST_CASE("sandwich equals the per-arm finite-sample identity on k=0 designs") {
    // With k = 0, Σ IF² /n² = Σ_a (n_a - 1)/n_a² s_a², so the gap to the
    // Welch variance is the per-arm factor (n_a-1)/n_a.
    for (std::uint64_t unit = 600; unit < 700; ++unit) {
        testing::DatasetOptions options;
        options.max_k = 0;
        const TrialDataset data = testing::make_random_dataset(unit, options);
        const AncovaFit fit = ancova_fit(data);
        const double sandwich = sandwich_variance(data, fit, SandwichCorrection::none).value;

        const std::size_t n1 = data.arm_count(1);
        const std::size_t n0 = data.arm_count(0);
        double mean1 = 0.0, mean0 = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i)
            (data.arms[i] ? mean1 : mean0) += data.outcomes[i];
        mean1 /= static_cast<double>(n1);
        mean0 /= static_cast<double>(n0);
        double ss1 = 0.0, ss0 = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i) {
            const double d = data.outcomes[i] - (data.arms[i] ? mean1 : mean0);
            (data.arms[i] ? ss1 : ss0) += d * d;
        }
        const double s1sq = ss1 / static_cast<double>(n1 - 1);
        const double s0sq = ss0 / static_cast<double>(n0 - 1);

        const double identity =
            (static_cast<double>(n1 - 1) / static_cast<double>(n1 * n1)) * s1sq +
            (static_cast<double>(n0 - 1) / static_cast<double>(n0 * n0)) * s0sq;
        CHECK(sandwich == doctest::Approx(identity).epsilon(1e-11));

        const double welch = welch_variance(data).value;
        const double bound =
            std::max(1.0 / static_cast<double>(n1), 1.0 / static_cast<double>(n0));
        CHECK(std::fabs(sandwich - welch) / welch <= bound * (1.0 + 1e-12));
    }
}

TEST_CASE("sandwich tracks welch within 2/n on balanced k=0 designs") {
    for (std::uint64_t unit = 700; unit < 760; ++unit) {
        testing::DatasetOptions options;
        options.max_k = 0;
        options.balanced_arms = true;
        const TrialDataset data = testing::make_random_dataset(unit, options);
        const AncovaFit fit = ancova_fit(data);
        const double sandwich = sandwich_variance(data, fit, SandwichCorrection::none).value;
        const double welch = welch_variance(data).value;
        // with n1 = n0 the per-arm factor makes the gap exactly 2/n
        CHECK(std::fabs(sandwich - welch) / welch <=
              2.0 / static_cast<double>(data.n()) * (1.0 + 1e-9));
    }
}

TEST_CASE("sandwich agrees with the model-based variance at pi_hat = 1/2") {
    // Balanced arms with per-arm centered covariates remove the sample W-A
    // correlation, leaving only the (n-1) vs n bookkeeping.
    for (std::uint64_t unit = 800; unit < 860; ++unit) {
        testing::DatasetOptions options;
        options.balanced_arms = true;
        options.center_w_within_arms = true;
        options.min_n = 40;
        const TrialDataset data = testing::make_random_dataset(unit, options);
        const AncovaFit fit = ancova_fit(data);
        const double sandwich = sandwich_variance(data, fit, SandwichCorrection::none).value;
        const double model = model_based_variance(data, fit).value;
        CHECK(std::fabs(sandwich - model) / model < 5.0 / static_cast<double>(data.n()));
    }
}

TEST_CASE("welch variance") {
    TrialDataset data;
    data.outcomes = {1.0, 3.0, 2.0, 2.0};
    data.arms = {1, 1, 0, 0};
    const auto welch = welch_variance(data);
    CHECK(welch.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(welch.kind == VarianceKind::welch);
    REQUIRE(welch.dof_reference.has_value());

    // equal arm variances and sizes: equals the pooled t variance
    TrialDataset symmetric;
    symmetric.outcomes = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    symmetric.arms = {1, 1, 1, 0, 0, 0};
    CHECK(welch_variance(symmetric).value ==
          doctest::Approx(pooled_t_variance(symmetric).value).epsilon(1e-13));

    TrialDataset tiny;
    tiny.outcomes = {1.0, 2.0, 3.0};
    tiny.arms = {1, 0, 0};
    CHECK_THROWS_AS(welch_variance(tiny), ValidationError);
}

TEST_CASE("wald test") {
    const VarianceEstimate unit_var{1.0, VarianceKind::sandwich_if, std::nullopt};

    const WaldResult null_result = wald_test(0.0, unit_var, 0.0, 0.95);
    CHECK(null_result.p_value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(null_result.ci_lower == doctest::Approx(-null_result.ci_upper).epsilon(1e-14));

    const WaldResult borderline = wald_test(1.96, unit_var, 0.0, 0.95);
    CHECK(borderline.p_value == doctest::Approx(0.05).epsilon(2e-2));
    CHECK(std::fabs(borderline.ci_lower) < 1e-3);
    CHECK(borderline.ci_upper == doctest::Approx(3.92).epsilon(1e-3));

    // p strictly decreasing in |estimate - null| at fixed variance
    double previous = 1.1;
    for (double estimate : {0.0, 0.3, 0.9, 1.4, 2.2, 3.7}) {
        const double p = wald_test(estimate, unit_var, 0.0, 0.95).p_value;
        CHECK(p < previous);
        previous = p;
    }

    CHECK_THROWS_AS(wald_test(1.0, {0.0, VarianceKind::welch, 4.0}, 0.0, 0.95), NumericalError);
    CHECK_THROWS_AS(wald_test(1.0, unit_var, 0.0, 1.5), ValidationError);

    // t reference widens the interval
    const VarianceEstimate with_df{1.0, VarianceKind::welch, 6.0};
    const WaldResult t_result = wald_test(1.0, with_df, 0.0, 0.95);
    CHECK(t_result.ci_upper > borderline.ci_upper - 0.96);
    CHECK(t_result.p_value == doctest::Approx(2.0 * stats::t_cdf(-1.0, 6.0)).epsilon(1e-12));
}

TEST_CASE("residual orthogonality invariants") {
    for (std::uint64_t unit = 900; unit < 1000; ++unit) {
        const TrialDataset data = testing::make_random_dataset(unit);
        const AncovaFit fit = ancova_fit(data);
        double total = 0.0, treated = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i) {
            total += fit.residuals[i];
            treated += fit.residuals[i] * data.arms[i];
            scale += std::fabs(fit.residuals[i]);
        }
        scale = std::max(scale, 1e-12);
        CHECK(std::fabs(total) <= 1e-8 * scale);
        CHECK(std::fabs(treated) <= 1e-8 * scale);
    }
}

TEST_CASE("affine reparameterisation of W leaves estimates unchanged") {
    RandomStream stream(0xAFF1, 0, StreamTag::generic);
    std::size_t checked = 0;
    for (std::uint64_t unit = 1100; checked < 60; ++unit) {
        testing::DatasetOptions options;
        options.min_n = 30;
        const TrialDataset data = testing::make_random_dataset(unit, options);
        if (data.k() == 0) continue;
        ++checked;
        const TrialDataset mapped = affine_transform(data, stream);

        const AncovaFit fit = ancova_fit(data);
        const AncovaFit fit2 = ancova_fit(mapped);
        CHECK(fit2.betaA == doctest::Approx(fit.betaA).epsilon(1e-8));
        CHECK(model_based_variance(mapped, fit2).value ==
              doctest::Approx(model_based_variance(data, fit).value).epsilon(1e-8));
        CHECK(sandwich_variance(mapped, fit2).value ==
              doctest::Approx(sandwich_variance(data, fit).value).epsilon(1e-8));
    }
}

TEST_CASE("permuting observations changes no estimate") {
    for (std::uint64_t unit = 1200; unit < 1230; ++unit) {
        const TrialDataset data = testing::make_random_dataset(unit);
        TrialDataset shuffled = data;
        RandomStream stream(unit, 0, StreamTag::generic);
        std::vector<std::size_t> order(data.n());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = data.n(); i-- > 1;) {
            const auto j = static_cast<std::size_t>(stream.next_below(i + 1));
            std::swap(order[i], order[j]);
        }
        for (std::size_t i = 0; i < data.n(); ++i) {
            shuffled.outcomes[i] = data.outcomes[order[i]];
            shuffled.arms[i] = data.arms[order[i]];
            for (std::size_t c = 0; c < data.k(); ++c)
                shuffled.covariates(i, c) = data.covariates(order[i], c);
        }
        const AncovaFit fit = ancova_fit(data);
        const AncovaFit fit2 = ancova_fit(shuffled);
        CHECK(fit2.betaA == doctest::Approx(fit.betaA).epsilon(1e-10));
        CHECK(model_based_variance(shuffled, fit2).value ==
              doctest::Approx(model_based_variance(data, fit).value).epsilon(1e-10));
        CHECK(unadjusted_estimate(shuffled) ==
              doctest::Approx(unadjusted_estimate(data)).epsilon(1e-10));
    }
}

TEST_CASE("variance estimates are non-negative; sandwich zero iff residuals zero") {
    for (std::uint64_t unit = 1300; unit < 1340; ++unit) {
        const TrialDataset data = testing::make_random_dataset(unit);
        const AncovaFit fit = ancova_fit(data);
        CHECK(model_based_variance(data, fit).value >= 0.0);
        CHECK(model_based_classical(data, fit).value >= 0.0);
        CHECK(welch_variance(data).value >= 0.0);
        const double sandwich = sandwich_variance(data, fit).value;
        CHECK(sandwich >= 0.0);
        double residual_scale = 0.0;
        for (double r : fit.residuals) residual_scale += std::fabs(r);
        if (residual_scale > 1e-10) CHECK(sandwich > 0.0);
    }
}
