// kernels_avx2.cpp — AVX2 backend. Two 4-lane registers form the 8 striped
// accumulators; the tail reuses lane = i & 7, so the addition sequence matches
// the scalar backend exactly. mul and add stay separate (no FMA).

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "ancova/kernels.hpp"

namespace ancova::kernels {

namespace {

inline double combine8(const double acc[8]) {
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
           ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

double sum_avx2(std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t n8 = n & ~std::size_t(7);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n8; i += 8) {
        a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x.data() + i));
        a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x.data() + i + 4));
    }
    alignas(32) double acc[8];
    _mm256_store_pd(acc, a0);
    _mm256_store_pd(acc + 4, a1);
    for (; i < n; ++i) acc[i & 7] += x[i];
    return combine8(acc);
}

double dot_avx2(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const std::size_t n8 = n & ~std::size_t(7);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n8; i += 8) {
        const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(x.data() + i),
                                         _mm256_loadu_pd(y.data() + i));
        const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(x.data() + i + 4),
                                         _mm256_loadu_pd(y.data() + i + 4));
        a0 = _mm256_add_pd(a0, p0);
        a1 = _mm256_add_pd(a1, p1);
    }
    alignas(32) double acc[8];
    _mm256_store_pd(acc, a0);
    _mm256_store_pd(acc + 4, a1);
    for (; i < n; ++i) acc[i & 7] += x[i] * y[i];
    return combine8(acc);
}

double sum_squares_avx2(std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t n8 = n & ~std::size_t(7);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n8; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(x.data() + i);
        const __m256d v1 = _mm256_loadu_pd(x.data() + i + 4);
        a0 = _mm256_add_pd(a0, _mm256_mul_pd(v0, v0));
        a1 = _mm256_add_pd(a1, _mm256_mul_pd(v1, v1));
    }
    alignas(32) double acc[8];
    _mm256_store_pd(acc, a0);
    _mm256_store_pd(acc + 4, a1);
    for (; i < n; ++i) acc[i & 7] += x[i] * x[i];
    return combine8(acc);
}

void axpy_avx2(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    const std::size_t n4 = n & ~std::size_t(3);
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d p = _mm256_mul_pd(av, _mm256_loadu_pd(x.data() + i));
        _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(y.data() + i), p));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

PowerSums centered_power_sums_avx2(std::span<const double> x, double center) {
    const std::size_t n = x.size();
    const std::size_t n8 = n & ~std::size_t(7);
    const __m256d c = _mm256_set1_pd(center);
    __m256d s2a = _mm256_setzero_pd();
    __m256d s2b = _mm256_setzero_pd();
    __m256d s4a = _mm256_setzero_pd();
    __m256d s4b = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n8; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), c);
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i + 4), c);
        const __m256d q0 = _mm256_mul_pd(d0, d0);
        const __m256d q1 = _mm256_mul_pd(d1, d1);
        s2a = _mm256_add_pd(s2a, q0);
        s2b = _mm256_add_pd(s2b, q1);
        s4a = _mm256_add_pd(s4a, _mm256_mul_pd(q0, q0));
        s4b = _mm256_add_pd(s4b, _mm256_mul_pd(q1, q1));
    }
    alignas(32) double acc2[8];
    alignas(32) double acc4[8];
    _mm256_store_pd(acc2, s2a);
    _mm256_store_pd(acc2 + 4, s2b);
    _mm256_store_pd(acc4, s4a);
    _mm256_store_pd(acc4 + 4, s4b);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        const double d2 = d * d;
        acc2[i & 7] += d2;
        acc4[i & 7] += d2 * d2;
    }
    return {combine8(acc2), combine8(acc4)};
}

constexpr KernelTable kAvx2Table{sum_avx2, dot_avx2, sum_squares_avx2, axpy_avx2,
                                 centered_power_sums_avx2};

}  // namespace

const KernelTable& avx2_kernel_table() { return kAvx2Table; }

bool avx2_cpu_supported() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

}  // namespace ancova::kernels

#endif  // x86_64
