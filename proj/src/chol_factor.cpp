#include "dynmix/chol_factor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dynmix {

namespace {

void require_dim(std::size_t expected, std::size_t actual, const char* what) {
    if (expected != actual) {
        std::ostringstream msg;
        msg << what << ": expected dimension " << expected << ", got " << actual;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

CholFactor::CholFactor(std::size_t dim)
    : dim_(dim), strict_lower_(strict_lower_count(dim), 0.0), log_diag_(dim, 0.0) {
    if (dim == 0) throw std::invalid_argument("CholFactor dimension must be positive");
}

CholFactor::CholFactor(std::size_t dim, std::vector<double> strict_lower,
                       std::vector<double> log_diag)
    : dim_(dim), strict_lower_(std::move(strict_lower)), log_diag_(std::move(log_diag)) {
    if (dim == 0) throw std::invalid_argument("CholFactor dimension must be positive");
    if (strict_lower_.size() != strict_lower_count(dim)) {
        throw std::invalid_argument("CholFactor strict lower size does not match dimension");
    }
    if (log_diag_.size() != dim) {
        throw std::invalid_argument("CholFactor log diagonal size does not match dimension");
    }
}

double CholFactor::diag(std::size_t i) const { return std::exp(log_diag_[i]); }

Matrix CholFactor::materialize() const {
    Matrix l(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < i; ++j) l(i, j) = lower(i, j);
        l(i, i) = diag(i);
    }
    return l;
}

double CholFactor::half_log_det_precision() const {
    double acc = 0.0;
    for (double v : log_diag_) acc += v;
    return acc;
}

CholFactor CholFactor::from_dense_lower(const Matrix& l) {
    if (l.rows() != l.cols()) {
        throw std::invalid_argument("from_dense_lower requires a square matrix");
    }
    const std::size_t n = l.rows();
    CholFactor out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(l(i, i) > 0.0)) {
            throw std::invalid_argument("from_dense_lower requires a positive diagonal");
        }
        out.log_diag(i) = std::log(l(i, i));
        for (std::size_t j = 0; j < i; ++j) out.lower(i, j) = l(i, j);
    }
    return out;
}

Matrix tri_mul(const CholFactor& factor, const Matrix& m, TriSide side) {
    const std::size_t d = factor.dim();
    const bool on_left = side == TriSide::left || side == TriSide::left_transposed;
    if (on_left) {
        if (m.rows() != d) {
            std::ostringstream msg;
            msg << "tri_mul: factor dim " << d << " does not match matrix rows " << m.rows();
            throw std::invalid_argument(msg.str());
        }
    } else if (m.cols() != d) {
        std::ostringstream msg;
        msg << "tri_mul: factor dim " << d << " does not match matrix cols " << m.cols();
        throw std::invalid_argument(msg.str());
    }

    Matrix out(m.rows(), m.cols());
    switch (side) {
        case TriSide::left:
            // (L m)_ij = sum_{k <= i} L_ik m_kj
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < m.cols(); ++j) {
                    double acc = factor.diag(i) * m(i, j);
                    for (std::size_t k = 0; k < i; ++k) acc += factor.lower(i, k) * m(k, j);
                    out(i, j) = acc;
                }
            break;
        case TriSide::left_transposed:
            // (L^T m)_ij = sum_{k >= i} L_ki m_kj
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < m.cols(); ++j) {
                    double acc = factor.diag(i) * m(i, j);
                    for (std::size_t k = i + 1; k < d; ++k) acc += factor.lower(k, i) * m(k, j);
                    out(i, j) = acc;
                }
            break;
        case TriSide::right:
            // (m L)_ij = sum_{k >= j} m_ik L_kj
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    double acc = m(i, j) * factor.diag(j);
                    for (std::size_t k = j + 1; k < d; ++k) acc += m(i, k) * factor.lower(k, j);
                    out(i, j) = acc;
                }
            break;
        case TriSide::right_transposed:
            // (m L^T)_ij = sum_{k <= j} m_ik L_jk
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    double acc = m(i, j) * factor.diag(j);
                    for (std::size_t k = 0; k < j; ++k) acc += m(i, k) * factor.lower(j, k);
                    out(i, j) = acc;
                }
            break;
    }
    return out;
}

Matrix solve_lower(const CholFactor& factor, const Matrix& b) {
    require_dim(factor.dim(), b.rows(), "solve_lower right-hand side rows");
    const std::size_t d = factor.dim();
    Matrix x = b;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t i = 0; i < d; ++i) {
            double v = x(i, j);
            for (std::size_t k = 0; k < i; ++k) v -= factor.lower(i, k) * x(k, j);
            x(i, j) = v / factor.diag(i);
        }
    }
    return x;
}

Matrix solve_lower_transposed(const CholFactor& factor, const Matrix& b) {
    require_dim(factor.dim(), b.rows(), "solve_lower_transposed right-hand side rows");
    const std::size_t d = factor.dim();
    Matrix x = b;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t ii = d; ii-- > 0;) {
            double v = x(ii, j);
            for (std::size_t k = ii + 1; k < d; ++k) v -= factor.lower(k, ii) * x(k, j);
            x(ii, j) = v / factor.diag(ii);
        }
    }
    return x;
}

}  // namespace dynmix
