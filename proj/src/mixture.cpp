#include "dynmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dynmix {

void MixtureBank::validate() const {
    if (components.empty()) {
        throw std::invalid_argument("mixture bank needs at least one component");
    }
    const std::size_t n0 = components.front().spatial.dim();
    const std::size_t q0 = components.front().temporal.dim();
    for (const MatnormComponent& comp : components) {
        if (comp.spatial.dim() != n0 || comp.temporal.dim() != q0) {
            throw std::invalid_argument("mixture components disagree on (N, Q)");
        }
    }
}

double log_sum_exp(std::span<const double> values) {
    const double shift = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(shift)) return shift;  // all -inf, or a stray inf/nan
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - shift);
    return shift + std::log(acc);
}

std::vector<double> log_softmax(std::span<const double> logits) {
    const double lse = log_sum_exp(logits);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out = log_softmax(logits);
    for (double& v : out) v = std::exp(v);
    return out;
}

std::vector<double> component_log_joint(const MixtureBank& bank, const Weights& w,
                                        const Matrix& residual) {
    if (w.logits.size() != bank.k()) {
        std::ostringstream msg;
        msg << "weights have " << w.logits.size() << " logits for " << bank.k() << " components";
        throw std::invalid_argument(msg.str());
    }
    const std::vector<double> log_w = log_softmax(w.logits);
    std::vector<double> z(bank.k());
    for (std::size_t k = 0; k < bank.k(); ++k) {
        z[k] = log_w[k] + log_density(bank.components[k], residual);
    }
    return z;
}

double nll_from_log_joints(std::span<const double> z) { return -log_sum_exp(z); }

double nll(const MixtureBank& bank, const Weights& w, const Matrix& residual) {
    return nll_from_log_joints(component_log_joint(bank, w, residual));
}

std::vector<double> responsibilities(std::span<const double> z) {
    return softmax(z);
}

double base_loss(const Matrix& y, const Matrix& m, BaseLoss base) {
    require_shape(m, y.rows(), y.cols(), "prediction");
    const Matrix diff = y - m;
    return base == BaseLoss::mse ? frobenius_norm_sq(diff) : l1_norm(diff);
}

double total_loss(const Matrix& y, const Matrix& m, const MixtureBank& bank, const Weights& w,
                  const LossConfig& cfg) {
    return (1.0 - cfg.rho) * base_loss(y, m, cfg.base) + cfg.rho * nll(bank, w, y - m);
}

LossGrad grad(const Matrix& y, const Matrix& m, const MixtureBank& bank, const Weights& w,
              const LossConfig& cfg) {
    const std::size_t n = bank.n();
    const std::size_t q = bank.q();
    require_shape(y, n, q, "target window");
    require_shape(m, n, q, "prediction");

    const Matrix r = y - m;
    const std::vector<double> z = component_log_joint(bank, w, r);
    const std::vector<double> resp = responsibilities(z);
    const std::vector<double> omega = softmax(w.logits);
    const double rho = cfg.rho;

    LossGrad out;
    out.mean = Matrix(n, q);
    out.logits.resize(bank.k());
    out.components.reserve(bank.k());

    // Base term.
    if (cfg.base == BaseLoss::mse) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < q; ++j)
                out.mean(i, j) = (1.0 - rho) * 2.0 * (m(i, j) - y(i, j));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < q; ++j) {
                const double d = m(i, j) - y(i, j);
                out.mean(i, j) = (1.0 - rho) * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
            }
    }

    for (std::size_t k = 0; k < bank.k(); ++k) {
        const MatnormComponent& comp = bank.components[k];
        const double scale = rho * resp[k];

        // d nll / d M = -sum_k resp_k * Lambda_N r Lambda_Q, assembled from
        // triangular products of the stored factors.
        const Matrix v = tri_mul(comp.spatial, r, TriSide::left_transposed);   // L_N^T r
        const Matrix zk = tri_mul(comp.temporal, v, TriSide::right);           // L_N^T r L_Q
        const Matrix g = tri_mul(comp.temporal, tri_mul(comp.spatial, zk, TriSide::left),
                                 TriSide::right_transposed);                   // Lambda_N r Lambda_Q
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < q; ++j) out.mean(i, j) -= scale * g(i, j);

        // Spatial factor: d z_k / d L_N = Q diag(1/L_nn) - (r Lambda_Q r^T) L_N.
        const Matrix w_mat = tri_mul(comp.temporal, r, TriSide::right);        // r L_Q
        const Matrix cn_ln = tri_mul(comp.spatial, matmul(w_mat, transpose(w_mat)),
                                     TriSide::right);                          // (r Lam_Q r^T) L_N
        // Temporal factor: d z_k / d L_Q = N diag(1/L_qq) - (r^T Lambda_N r) L_Q.
        const Matrix dq_lq = tri_mul(comp.temporal, matmul(transpose(v), v), TriSide::right);

        ComponentGrad cg;
        cg.spatial.strict_lower.resize(CholFactor::strict_lower_count(n));
        cg.spatial.log_diag.resize(n);
        cg.temporal.strict_lower.resize(CholFactor::strict_lower_count(q));
        cg.temporal.log_diag.resize(q);

        std::size_t idx = 0;
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) cg.spatial.strict_lower[idx++] = scale * cn_ln(i, j);
        for (std::size_t i = 0; i < n; ++i) {
            cg.spatial.log_diag[i] =
                -scale * (static_cast<double>(q) - cn_ln(i, i) * comp.spatial.diag(i));
        }
        idx = 0;
        for (std::size_t i = 1; i < q; ++i)
            for (std::size_t j = 0; j < i; ++j) cg.temporal.strict_lower[idx++] = scale * dq_lq(i, j);
        for (std::size_t i = 0; i < q; ++i) {
            cg.temporal.log_diag[i] =
                -scale * (static_cast<double>(n) - dq_lq(i, i) * comp.temporal.diag(i));
        }
        out.components.push_back(std::move(cg));

        out.logits[k] = rho * (omega[k] - resp[k]);
    }
    return out;
}

}  // namespace dynmix
