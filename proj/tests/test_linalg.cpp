// test_linalg.cpp — QR least squares, rank/condition guards, SPD solves.

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ancova/errors.hpp"
#include "ancova/linalg.hpp"
#include "ancova/rng.hpp"

using namespace ancova;

namespace {

Matrix random_matrix(std::size_t n, std::size_t p, std::uint64_t unit) {
    RandomStream stream(0x11A6, unit, StreamTag::generic);
    Matrix m(n, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i) m(i, j) = 2.0 * stream.next_u01() - 1.0;
    return m;
}

}  // namespace

TEST_CASE("exact interpolation recovers coefficients") {
    // y = 1 + 2 x1 - 3 x2, no noise
    Matrix x(20, 3);
    std::vector<double> y(20);
    RandomStream stream(42, 0, StreamTag::generic);
    for (std::size_t i = 0; i < 20; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = stream.next_u01();
        x(i, 2) = stream.next_u01();
        y[i] = 1.0 + 2.0 * x(i, 1) - 3.0 * x(i, 2);
    }
    const OlsFit fit = least_squares_qr(x, y);
    CHECK(fit.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.coefficients[2] == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(fit.rss == doctest::Approx(0.0).scale(1.0).epsilon(1e-20));
}

TEST_CASE("least squares matches normal equations on random problems") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const std::size_t n = 30 + 7 * trial;
        const std::size_t p = 2 + trial % 4;
        Matrix x = random_matrix(n, p, trial);
        for (std::size_t i = 0; i < n; ++i) x(i, 0) = 1.0;
        std::vector<double> y(n);
        RandomStream stream(0x77, trial, StreamTag::generic);
        for (auto& v : y) v = 4.0 * stream.next_u01() - 2.0;

        const OlsFit fit = least_squares_qr(x, y);

        // independent route: solve XᵀX b = Xᵀy by Cholesky
        Matrix gram(p, p);
        std::vector<double> xty(p, 0.0);
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t c = 0; c < p; ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += x(i, r) * x(i, c);
                gram(r, c) = s;
            }
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x(i, r) * y[i];
            xty[r] = s;
        }
        const auto reference = solve_spd(gram, xty, "gram");
        for (std::size_t j = 0; j < p; ++j)
            CHECK(fit.coefficients[j] == doctest::Approx(reference[j]).epsilon(1e-10));

        // residual orthogonality to the column space
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x(i, j) * fit.residuals[i];
            CHECK(std::fabs(s) < 1e-8);
        }
    }
}

TEST_CASE("rank deficiency reports the offending column") {
    Matrix x(10, 3);
    RandomStream stream(5, 0, StreamTag::generic);
    for (std::size_t i = 0; i < 10; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = stream.next_u01();
        x(i, 2) = 2.0 * x(i, 1);  // exact duplicate direction
    }
    std::vector<double> y(10, 1.0);
    OlsOptions options;
    options.column_labels = {"(intercept)", "W1", "W2"};
    CHECK_THROWS_WITH_AS(least_squares_qr(x, y, options),
                         doctest::Contains("W2"), NumericalError);
}

TEST_CASE("condition guard refuses nearly collinear designs") {
    // Column 2 differs from column 1 by a perturbation large enough to pass
    // the rank check but small enough to push the condition estimate past 1e12.
    Matrix x(50, 3);
    RandomStream stream(9, 0, StreamTag::generic);
    for (std::size_t i = 0; i < 50; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = stream.next_u01();
        x(i, 2) = x(i, 1) + 3e-13 * (stream.next_u01() - 0.5);
    }
    std::vector<double> y(50, 1.0);
    CHECK_THROWS_WITH_AS(least_squares_qr(x, y), doctest::Contains("condition"),
                         NumericalError);
}

TEST_CASE("xtx_inverse_diagonal matches explicit inverse") {
    const std::size_t n = 40, p = 3;
    Matrix x = random_matrix(n, p, 17);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = 1.0;
    std::vector<double> y(n);
    std::iota(y.begin(), y.end(), 0.0);
    const OlsFit fit = least_squares_qr(x, y);

    Matrix gram(p, p);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x(i, r) * x(i, c);
            gram(r, c) = s;
        }
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> e(p, 0.0);
        e[j] = 1.0;
        const auto col = solve_spd(gram, e, "gram");
        CHECK(xtx_inverse_diagonal(fit.r_factor, j) ==
              doctest::Approx(col[j]).epsilon(1e-9));
    }
}

TEST_CASE("solve_spd rejects indefinite matrices") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;
    CHECK_THROWS_AS(solve_spd(a, {1.0, 1.0}, "test matrix"), NumericalError);
}
