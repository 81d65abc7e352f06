#ifndef DYNMIX_MIXTURE_HPP
#define DYNMIX_MIXTURE_HPP

#include <span>
#include <vector>

#include "dynmix/matnorm.hpp"

namespace dynmix {

/// The K matrix-normal components of the dynamic mixture. Weights are not
/// stored here: they are produced per window by the forecasting model.
struct MixtureBank {
    std::vector<MatnormComponent> components;

    [[nodiscard]] std::size_t k() const { return components.size(); }
    [[nodiscard]] std::size_t n() const { return components.front().spatial.dim(); }
    [[nodiscard]] std::size_t q() const { return components.front().temporal.dim(); }

    /// Checks K >= 1 and that all components share the same (N, Q).
    void validate() const;
};

/// Mixture weights as raw logits. log-weights are always taken as
/// logit_k - logsumexp(logits), never as log(softmax(...)), so a weight that
/// underflows to zero still has a finite log.
struct Weights {
    std::vector<double> logits;
};

enum class BaseLoss { mse, mae };

struct LossConfig {
    double rho = 0.001;
    BaseLoss base = BaseLoss::mse;
};

[[nodiscard]] double log_sum_exp(std::span<const double> values);
[[nodiscard]] std::vector<double> log_softmax(std::span<const double> logits);
[[nodiscard]] std::vector<double> softmax(std::span<const double> logits);

/// Per-component log-joint z_k = log w_k + log p_k(residual).
[[nodiscard]] std::vector<double> component_log_joint(const MixtureBank& bank, const Weights& w,
                                                      const Matrix& residual);

/// Mixture negative log-likelihood from precomputed log-joints,
/// -(z* + log sum exp(z_k - z*)); finite for |z_k| up to 1e4 and beyond.
[[nodiscard]] double nll_from_log_joints(std::span<const double> z);

[[nodiscard]] double nll(const MixtureBank& bank, const Weights& w, const Matrix& residual);

/// Posterior component probabilities exp(z_k - logsumexp(z)).
[[nodiscard]] std::vector<double> responsibilities(std::span<const double> z);

/// ||y - m||_F^2 (mse) or ||y - m||_1 (mae) summed over the window.
[[nodiscard]] double base_loss(const Matrix& y, const Matrix& m, BaseLoss base);

/// (1 - rho) * base_loss + rho * nll, with the NLL taken on the residual y - m.
[[nodiscard]] double total_loss(const Matrix& y, const Matrix& m, const MixtureBank& bank,
                                const Weights& w, const LossConfig& cfg);

struct FactorGrad {
    std::vector<double> strict_lower;
    std::vector<double> log_diag;
};

struct ComponentGrad {
    FactorGrad spatial;
    FactorGrad temporal;
};

/// Gradients of total_loss. Factor gradients exist only for the packed
/// strict-lower and log-diagonal parameters; upper-triangular positions have
/// no slot to receive a gradient.
struct LossGrad {
    Matrix mean;                 // d total / d M
    std::vector<double> logits;  // d total / d weight logits
    std::vector<ComponentGrad> components;
};

[[nodiscard]] LossGrad grad(const Matrix& y, const Matrix& m, const MixtureBank& bank,
                            const Weights& w, const LossConfig& cfg);

}  // namespace dynmix

#endif
