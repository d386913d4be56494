// linalg.cpp — Householder QR least squares with rank and condition guards.

#include "ancova/linalg.hpp"

#include <cmath>
#include <limits>

#include "ancova/errors.hpp"
#include "ancova/kernels.hpp"

namespace ancova {

namespace {

std::string label_for(const OlsOptions& options, std::size_t j) {
    if (j < options.column_labels.size()) return options.column_labels[j];
    return "column " + std::to_string(j);
}

// ‖R‖₁ ‖R⁻¹‖₁ for upper-triangular R; R⁻¹ built by back substitution.
double condition_1norm(const Matrix& r) {
    const std::size_t p = r.cols();
    double norm_r = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i <= j; ++i) s += std::fabs(r(i, j));
        norm_r = std::max(norm_r, s);
    }
    double norm_rinv = 0.0;
    std::vector<double> w(p);
    for (std::size_t j = 0; j < p; ++j) {
        // Solve R w = e_j.
        for (std::size_t i = 0; i < p; ++i) w[i] = (i == j) ? 1.0 : 0.0;
        for (std::size_t i = j + 1; i-- > 0;) {
            double s = w[i];
            for (std::size_t l = i + 1; l <= j; ++l) s -= r(i, l) * w[l];
            if (r(i, i) == 0.0) return std::numeric_limits<double>::infinity();
            w[i] = s / r(i, i);
        }
        double colsum = 0.0;
        for (std::size_t i = 0; i <= j; ++i) colsum += std::fabs(w[i]);
        norm_rinv = std::max(norm_rinv, colsum);
    }
    return norm_r * norm_rinv;
}

}  // namespace

OlsFit least_squares_qr(const Matrix& x, std::span<const double> y,
                        const OlsOptions& options) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (y.size() != n) throw ValidationError("least_squares_qr: y length does not match rows");
    if (n < p) throw NumericalError("least_squares_qr: fewer observations than parameters");

    Matrix a = x;  // factored in place
    std::vector<double> qty(y.begin(), y.end());

    std::vector<double> original_col_norm(p);
    for (std::size_t j = 0; j < p; ++j)
        original_col_norm[j] = std::sqrt(kernels::sum_squares(x.col(j)));

    std::vector<double> v(n);
    for (std::size_t j = 0; j < p; ++j) {
        auto colj = a.col(j);
        const std::size_t len = n - j;
        std::span<double> sub(colj.data() + j, len);

        const double normx = std::sqrt(kernels::sum_squares(sub));
        const double dep_tol =
            std::max(static_cast<double>(n), 16.0) * std::numeric_limits<double>::epsilon() *
            std::max(original_col_norm[j], 1e-300);
        if (normx <= dep_tol) {
            throw NumericalError("design matrix is rank deficient: " + label_for(options, j) +
                                 " is linearly dependent on preceding columns");
        }

        const double x0 = sub[0];
        const double alpha = (x0 >= 0.0) ? -normx : normx;
        const double v0 = x0 - alpha;
        // v = x - alpha e1; H = I - tau v vᵀ with tau = 2/‖v‖².
        const double vnorm2 = 2.0 * normx * (normx + std::fabs(x0));
        const double tau = (vnorm2 > 0.0) ? 2.0 / vnorm2 : 0.0;

        v[0] = v0;
        for (std::size_t i = 1; i < len; ++i) v[i] = sub[i];
        std::span<const double> vh(v.data(), len);

        sub[0] = alpha;  // R(j, j)
        for (std::size_t i = 1; i < len; ++i) sub[i] = 0.0;

        for (std::size_t c = j + 1; c < p; ++c) {
            std::span<double> target(a.col(c).data() + j, len);
            const double w = tau * kernels::dot(vh, target);
            kernels::axpy(-w, vh, target);
        }
        std::span<double> ty(qty.data() + j, len);
        const double wy = tau * kernels::dot(vh, ty);
        kernels::axpy(-wy, vh, ty);
    }

    OlsFit fit;
    fit.r_factor = Matrix(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i <= j; ++i) fit.r_factor(i, j) = a(i, j);

    fit.condition = condition_1norm(fit.r_factor);
    if (!(fit.condition < options.condition_limit)) {
        throw NumericalError("design matrix is ill-conditioned: condition estimate " +
                             std::to_string(fit.condition) + " exceeds limit " +
                             std::to_string(options.condition_limit));
    }

    fit.coefficients.assign(p, 0.0);
    for (std::size_t i = p; i-- > 0;) {
        double s = qty[i];
        for (std::size_t l = i + 1; l < p; ++l) s -= fit.r_factor(i, l) * fit.coefficients[l];
        fit.coefficients[i] = s / fit.r_factor(i, i);
    }

    fit.residuals.assign(y.begin(), y.end());
    for (std::size_t j = 0; j < p; ++j)
        kernels::axpy(-fit.coefficients[j], x.col(j), fit.residuals);
    fit.rss = kernels::sum_squares(fit.residuals);
    return fit;
}

double xtx_inverse_diagonal(const Matrix& r_factor, std::size_t index) {
    const std::size_t p = r_factor.cols();
    // w = R⁻ᵀ e_index by forward substitution on Rᵀ.
    std::vector<double> w(p, 0.0);
    for (std::size_t i = index; i < p; ++i) {
        double s = (i == index) ? 1.0 : 0.0;
        for (std::size_t l = index; l < i; ++l) s -= r_factor(l, i) * w[l];
        w[i] = s / r_factor(i, i);
    }
    double out = 0.0;
    for (std::size_t i = index; i < p; ++i) out += w[i] * w[i];
    return out;
}

std::vector<double> solve_spd(Matrix a, std::vector<double> b, std::string_view context) {
    const std::size_t p = a.rows();
    if (a.cols() != p || b.size() != p) throw ValidationError("solve_spd: shape mismatch");
    // Lower Cholesky in place.
    for (std::size_t j = 0; j < p; ++j) {
        double d = a(j, j);
        for (std::size_t l = 0; l < j; ++l) d -= a(j, l) * a(j, l);
        if (!(d > 0.0)) {
            throw NumericalError(std::string(context) + " is singular or not positive definite");
        }
        const double root = std::sqrt(d);
        a(j, j) = root;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a(i, j);
            for (std::size_t l = 0; l < j; ++l) s -= a(i, l) * a(j, l);
            a(i, j) = s / root;
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t l = 0; l < i; ++l) s -= a(i, l) * b[l];
        b[i] = s / a(i, i);
    }
    for (std::size_t i = p; i-- > 0;) {
        double s = b[i];
        for (std::size_t l = i + 1; l < p; ++l) s -= a(l, i) * b[l];
        b[i] = s / a(i, i);
    }
    return b;
}

}  // namespace ancova
