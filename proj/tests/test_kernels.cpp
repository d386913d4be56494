// test_kernels.cpp — reduction kernel accuracy and backend equivalence.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "ancova/kernels.hpp"
#include "ancova/rng.hpp"

using namespace ancova;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t unit) {
    RandomStream stream(0xBEEF, unit, StreamTag::generic);
    std::vector<double> v(n);
    for (auto& x : v) x = 20.0 * stream.next_u01() - 10.0;
    return v;
}

long double naive_sum(const std::vector<double>& x) {
    long double s = 0.0L;
    for (double v : x) s += v;
    return s;
}

long double naive_dot(const std::vector<double>& x, const std::vector<double>& y) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * y[i];
    return s;
}

}  // namespace

TEST_CASE("kernel reductions agree with long double references") {
    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{7},
                          std::size_t{8}, std::size_t{9}, std::size_t{31}, std::size_t{64},
                          std::size_t{1000}, std::size_t{4097}}) {
        const auto x = random_vector(n, n);
        const auto y = random_vector(n, n + 101);
        const double scale = static_cast<double>(n) + 1.0;

        CHECK(kernels::sum(x) ==
              doctest::Approx(static_cast<double>(naive_sum(x))).epsilon(1e-13).scale(scale));
        CHECK(kernels::dot(x, y) ==
              doctest::Approx(static_cast<double>(naive_dot(x, y))).epsilon(1e-13).scale(scale));
        CHECK(kernels::sum_squares(x) ==
              doctest::Approx(static_cast<double>(naive_dot(x, x))).epsilon(1e-13).scale(scale));

        long double s2 = 0.0L, s4 = 0.0L;
        for (double v : x) {
            const long double d = static_cast<long double>(v) - 0.25L;
            s2 += d * d;
            s4 += d * d * d * d;
        }
        const auto ps = kernels::centered_power_sums(x, 0.25);
        CHECK(ps.sum2 == doctest::Approx(static_cast<double>(s2)).epsilon(1e-13).scale(scale));
        CHECK(ps.sum4 ==
              doctest::Approx(static_cast<double>(s4)).epsilon(1e-12).scale(scale * scale));
    }
}

TEST_CASE("axpy matches elementwise reference") {
    const auto x = random_vector(137, 7);
    auto y = random_vector(137, 8);
    auto expected = y;
    for (std::size_t i = 0; i < x.size(); ++i) expected[i] += 0.37 * x[i];
    kernels::axpy(0.37, x, y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == expected[i]);
}

TEST_CASE("scalar and AVX2 backends are bit-identical") {
    if (!kernels::backend_available(kernels::Backend::avx2)) {
        MESSAGE("AVX2 not available; skipping backend equivalence");
        return;
    }
    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{5}, std::size_t{8},
                          std::size_t{12}, std::size_t{16}, std::size_t{17}, std::size_t{255},
                          std::size_t{1024}, std::size_t{10001}}) {
        const auto x = random_vector(n, 1000 + n);
        const auto y = random_vector(n, 2000 + n);

        kernels::force_backend(kernels::Backend::scalar);
        const double sum_s = kernels::sum(x);
        const double dot_s = kernels::dot(x, y);
        const double ss_s = kernels::sum_squares(x);
        const auto ps_s = kernels::centered_power_sums(x, -1.5);
        auto axpy_s = y;
        kernels::axpy(2.5, x, axpy_s);

        kernels::force_backend(kernels::Backend::avx2);
        const double sum_v = kernels::sum(x);
        const double dot_v = kernels::dot(x, y);
        const double ss_v = kernels::sum_squares(x);
        const auto ps_v = kernels::centered_power_sums(x, -1.5);
        auto axpy_v = y;
        kernels::axpy(2.5, x, axpy_v);

        kernels::reset_backend();

        // bitwise equality, not approximate
        CHECK(sum_s == sum_v);
        CHECK(dot_s == dot_v);
        CHECK(ss_s == ss_v);
        CHECK(ps_s.sum2 == ps_v.sum2);
        CHECK(ps_s.sum4 == ps_v.sum4);
        CHECK(axpy_s == axpy_v);
    }
}

TEST_CASE("backend control") {
    CHECK(kernels::backend_available(kernels::Backend::scalar));
    kernels::force_backend(kernels::Backend::scalar);
    CHECK(kernels::active_backend() == kernels::Backend::scalar);
    kernels::reset_backend();
    CHECK(kernels::backend_name(kernels::Backend::avx2) == "avx2");
}
