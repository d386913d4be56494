// kernels.hpp — data-parallel reduction kernels with runtime backend dispatch.
//
// Every reduction runs eight independent accumulators striped over the input
// (lane = index mod 8) and combines them with a fixed tree:
//
//   ((l0+l1)+(l2+l3)) + ((l4+l5)+(l6+l7))
//
// The scalar backend executes exactly the same additions in exactly the same
// order as the AVX2 backend (two 4-lane registers = 8 lanes), and no backend
// uses FMA, so results are bit-identical across backends and machines.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace ancova::kernels {

enum class Backend { scalar, avx2 };

// Backend currently used by the free functions below. Auto-detected at first
// use (AVX2 when the CPU supports it), overridable with ANCOVA_KERNELS=scalar
// or force_backend().
Backend active_backend();
bool backend_available(Backend b);
void force_backend(Backend b);
void reset_backend();
std::string_view backend_name(Backend b);

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double sum_squares(std::span<const double> x);

// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

struct PowerSums {
    double sum2 = 0.0;  // Σ (x-c)^2
    double sum4 = 0.0;  // Σ (x-c)^4
};
PowerSums centered_power_sums(std::span<const double> x, double center);

// Implementation table; one instance per backend.
struct KernelTable {
    double (*sum)(std::span<const double>);
    double (*dot)(std::span<const double>, std::span<const double>);
    double (*sum_squares)(std::span<const double>);
    void (*axpy)(double, std::span<const double>, std::span<double>);
    PowerSums (*centered_power_sums)(std::span<const double>, double);
};

}  // namespace ancova::kernels
