// kernels.cpp — scalar reference backend and runtime dispatch.

#include "ancova/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ancova::kernels {

namespace {

inline double combine8(const double acc[8]) {
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
           ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// ============================================================================
// Scalar reference kernels. Lane assignment i & 7 mirrors the SIMD layout.
// ============================================================================

double sum_scalar(std::span<const double> x) {
    double acc[8] = {};
    for (std::size_t i = 0; i < x.size(); ++i) acc[i & 7] += x[i];
    return combine8(acc);
}

double dot_scalar(std::span<const double> x, std::span<const double> y) {
    double acc[8] = {};
    for (std::size_t i = 0; i < x.size(); ++i) acc[i & 7] += x[i] * y[i];
    return combine8(acc);
}

double sum_squares_scalar(std::span<const double> x) {
    double acc[8] = {};
    for (std::size_t i = 0; i < x.size(); ++i) acc[i & 7] += x[i] * x[i];
    return combine8(acc);
}

void axpy_scalar(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

PowerSums centered_power_sums_scalar(std::span<const double> x, double center) {
    double acc2[8] = {};
    double acc4[8] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - center;
        const double d2 = d * d;
        acc2[i & 7] += d2;
        acc4[i & 7] += d2 * d2;
    }
    return {combine8(acc2), combine8(acc4)};
}

constexpr KernelTable kScalarTable{sum_scalar, dot_scalar, sum_squares_scalar,
                                   axpy_scalar, centered_power_sums_scalar};

}  // namespace

#if defined(ANCOVA_HAVE_AVX2)
// Defined in kernels_avx2.cpp.
const KernelTable& avx2_kernel_table();
bool avx2_cpu_supported();
#endif

namespace {

struct ActiveState {
    const KernelTable* table;
    Backend backend;
};

ActiveState detect() {
#if defined(ANCOVA_HAVE_AVX2)
    const char* env = std::getenv("ANCOVA_KERNELS");
    const bool forced_scalar = env != nullptr && std::string_view(env) == "scalar";
    if (!forced_scalar && avx2_cpu_supported()) {
        return {&avx2_kernel_table(), Backend::avx2};
    }
#endif
    return {&kScalarTable, Backend::scalar};
}

ActiveState& state() {
    static ActiveState s = detect();
    return s;
}

}  // namespace

Backend active_backend() { return state().backend; }

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
#if defined(ANCOVA_HAVE_AVX2)
    return avx2_cpu_supported();
#else
    return false;
#endif
}

void force_backend(Backend b) {
    if (!backend_available(b)) {
        throw std::runtime_error("kernel backend not available on this machine: " +
                                 std::string(backend_name(b)));
    }
    if (b == Backend::scalar) {
        state() = {&kScalarTable, Backend::scalar};
        return;
    }
#if defined(ANCOVA_HAVE_AVX2)
    state() = {&avx2_kernel_table(), Backend::avx2};
#endif
}

void reset_backend() { state() = detect(); }

std::string_view backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

double sum(std::span<const double> x) { return state().table->sum(x); }

double dot(std::span<const double> x, std::span<const double> y) {
    return state().table->dot(x, y);
}

double sum_squares(std::span<const double> x) { return state().table->sum_squares(x); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    state().table->axpy(a, x, y);
}

PowerSums centered_power_sums(std::span<const double> x, double center) {
    return state().table->centered_power_sums(x, center);
}

}  // namespace ancova::kernels
