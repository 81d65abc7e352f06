#ifndef DYNMIX_MATRIX_HPP
#define DYNMIX_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace dynmix {

/// Dense row-major matrix of doubles. Small and value-semantic; this is the
/// only matrix type the library uses.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double> data() { return data_; }
    [[nodiscard]] std::span<const double> data() const { return data_; }

    [[nodiscard]] bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

[[nodiscard]] Matrix matmul(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix transpose(const Matrix& m);

/// Kronecker product. Lives outside the training hot path; the NLL and its
/// gradients never form the full (rows*rows')x(cols*cols') matrix.
[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

[[nodiscard]] double frobenius_norm_sq(const Matrix& m);
[[nodiscard]] double l1_norm(const Matrix& m);

[[nodiscard]] bool all_finite(const Matrix& m);

/// Lower Cholesky factor of a symmetric positive-definite matrix.
/// Throws std::invalid_argument if the matrix is not SPD.
[[nodiscard]] Matrix dense_cholesky(const Matrix& spd);

/// Checks shapes match; throws std::invalid_argument naming expected vs
/// actual dims otherwise. `what` names the offending argument.
void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what);

}  // namespace dynmix

#endif
