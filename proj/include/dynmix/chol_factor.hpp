#ifndef DYNMIX_CHOL_FACTOR_HPP
#define DYNMIX_CHOL_FACTOR_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "dynmix/matrix.hpp"

namespace dynmix {

/// Cholesky factor L of a precision matrix, Lambda = L * L^T.
///
/// Storage is structural: the strict lower triangle is packed row by row and
/// the diagonal is kept in log space, so the materialized factor is always
/// lower-triangular with a strictly positive diagonal no matter what values
/// an optimizer writes into the parameters. The upper triangle does not
/// exist, which also keeps it exactly zero across gradient updates.
class CholFactor {
public:
    /// Identity factor (zero strict lower triangle, zero log-diagonal).
    explicit CholFactor(std::size_t dim);
    CholFactor(std::size_t dim, std::vector<double> strict_lower, std::vector<double> log_diag);

    [[nodiscard]] std::size_t dim() const { return dim_; }

    static std::size_t strict_lower_count(std::size_t dim) { return dim * (dim - 1) / 2; }

    /// Strict lower entry (i, j), requires i > j.
    [[nodiscard]] double lower(std::size_t i, std::size_t j) const {
        return strict_lower_[i * (i - 1) / 2 + j];
    }
    double& lower(std::size_t i, std::size_t j) { return strict_lower_[i * (i - 1) / 2 + j]; }

    [[nodiscard]] double log_diag(std::size_t i) const { return log_diag_[i]; }
    double& log_diag(std::size_t i) { return log_diag_[i]; }

    /// Diagonal entry exp(log_diag[i]).
    [[nodiscard]] double diag(std::size_t i) const;

    [[nodiscard]] std::span<double> strict_lower() { return strict_lower_; }
    [[nodiscard]] std::span<const double> strict_lower() const { return strict_lower_; }
    [[nodiscard]] std::span<double> log_diags() { return log_diag_; }
    [[nodiscard]] std::span<const double> log_diags() const { return log_diag_; }

    /// Dense dim x dim lower-triangular matrix with exp(log_diag) diagonal.
    [[nodiscard]] Matrix materialize() const;

    /// log|Lambda|^{1/2} = log|Sigma|^{-1/2} = sum of log-diagonal entries.
    /// No determinant or inverse routine is ever invoked.
    [[nodiscard]] double half_log_det_precision() const;

    /// Builds a factor from a dense lower-triangular matrix with positive
    /// diagonal (e.g. the output of dense_cholesky).
    static CholFactor from_dense_lower(const Matrix& l);

private:
    std::size_t dim_ = 0;
    std::vector<double> strict_lower_;
    std::vector<double> log_diag_;
};

enum class TriSide {
    left,              // L * m
    left_transposed,   // L^T * m
    right,             // m * L
    right_transposed,  // m * L^T
};

/// Multiplies by the materialized factor without forming it, exploiting the
/// triangular structure.
[[nodiscard]] Matrix tri_mul(const CholFactor& factor, const Matrix& m, TriSide side);

/// Solves L * X = B by forward substitution.
[[nodiscard]] Matrix solve_lower(const CholFactor& factor, const Matrix& b);

/// Solves L^T * X = B by back substitution.
[[nodiscard]] Matrix solve_lower_transposed(const CholFactor& factor, const Matrix& b);

}  // namespace dynmix

#endif
