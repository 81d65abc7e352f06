#ifndef DYNMIX_MATNORM_HPP
#define DYNMIX_MATNORM_HPP

#include "dynmix/chol_factor.hpp"
#include "dynmix/matrix.hpp"
#include "dynmix/rng.hpp"

namespace dynmix {

/// One zero-mean matrix-normal component, parameterized by the Cholesky
/// factors of the spatial (N x N) and temporal (Q x Q) precision matrices.
struct MatnormComponent {
    CholFactor spatial;
    CholFactor temporal;

    MatnormComponent(CholFactor spatial_factor, CholFactor temporal_factor)
        : spatial(std::move(spatial_factor)), temporal(std::move(temporal_factor)) {}

    static MatnormComponent identity(std::size_t n, std::size_t q) {
        return {CholFactor(n), CholFactor(q)};
    }
};

/// Log-density of the zero-mean matrix normal at an N x Q residual:
///
///   -(NQ/2) log 2pi + N * sum_q log[L_Q]_qq + Q * sum_n log[L_N]_nn
///     - 1/2 * ||L_N^T r L_Q||_F^2
///
/// Never builds the NQ x NQ covariance and never inverts a matrix.
[[nodiscard]] double log_density(const MatnormComponent& comp, const Matrix& residual);

/// Draws one N x Q matrix with vec-covariance Sigma_Q (x) Sigma_N by
/// back-substituting i.i.d. standard normals against the stored precision
/// factors: returns A E B^T with L_N^T A = I and L_Q^T B = I.
[[nodiscard]] Matrix sample(const MatnormComponent& comp, Rng& rng);

}  // namespace dynmix

#endif
