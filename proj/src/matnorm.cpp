#include "dynmix/matnorm.hpp"

#include <cmath>

namespace dynmix {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double log_density(const MatnormComponent& comp, const Matrix& residual) {
    const std::size_t n = comp.spatial.dim();
    const std::size_t q = comp.temporal.dim();
    require_shape(residual, n, q, "matrix normal residual");

    const Matrix z = tri_mul(comp.temporal, tri_mul(comp.spatial, residual, TriSide::left_transposed),
                             TriSide::right);
    const double nd = static_cast<double>(n);
    const double qd = static_cast<double>(q);
    return -0.5 * nd * qd * kLog2Pi + nd * comp.temporal.half_log_det_precision() +
           qd * comp.spatial.half_log_det_precision() - 0.5 * frobenius_norm_sq(z);
}

Matrix sample(const MatnormComponent& comp, Rng& rng) {
    const std::size_t n = comp.spatial.dim();
    const std::size_t q = comp.temporal.dim();
    Matrix e(n, q);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j) e(i, j) = rng.normal();

    // A E B^T = L_N^{-T} E L_Q^{-1}; two triangular solves, no covariance formed.
    const Matrix left = solve_lower_transposed(comp.spatial, e);
    return transpose(solve_lower_transposed(comp.temporal, transpose(left)));
}

}  // namespace dynmix
