// linalg.hpp — column-major matrix, Householder least squares, small SPD solves.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ancova {

// Dense column-major matrix. Columns are contiguous, so the QR inner loops
// hand whole columns to the reduction kernels.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct OlsOptions {
    double condition_limit = 1e12;
    // Labels used in diagnostics; defaults to "column <j>" when empty.
    std::vector<std::string> column_labels;
};

struct OlsFit {
    std::vector<double> coefficients;
    std::vector<double> residuals;
    double rss = 0.0;
    double condition = 0.0;  // 1-norm condition estimate of the R factor
    Matrix r_factor;         // p x p upper triangular
};

// Least squares via Householder QR. Throws NumericalError on rank deficiency
// (naming the offending column) or when the condition estimate exceeds
// options.condition_limit.
OlsFit least_squares_qr(const Matrix& x, std::span<const double> y,
                        const OlsOptions& options = {});

// Diagonal entry of (XᵀX)⁻¹ from the triangular factor: ‖R⁻ᵀ e_j‖².
double xtx_inverse_diagonal(const Matrix& r_factor, std::size_t index);

// Solve A z = b for symmetric positive definite A (in-place Cholesky).
// `context` names the matrix in error messages.
std::vector<double> solve_spd(Matrix a, std::vector<double> b, std::string_view context);

}  // namespace ancova
