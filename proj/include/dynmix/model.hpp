#ifndef DYNMIX_MODEL_HPP
#define DYNMIX_MODEL_HPP

#include <span>
#include <string>
#include <vector>

#include "dynmix/matrix.hpp"
#include "dynmix/rng.hpp"

namespace dynmix {

enum class Activation { relu, tanh };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

/// Fully connected trunk plus two head MLPs. The trunk flattens the N x P
/// input window, the mean head emits an unbounded N x Q matrix (no final
/// activation) and the weight head emits K logits whose softmax gives the
/// mixture weights.
struct ModelConfig {
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t q = 0;
    std::size_t k = 1;
    std::size_t hidden_width = 64;
    std::size_t hidden_depth = 2;
    std::size_t head_width = 64;
    Activation activation = Activation::relu;

    void validate() const;
};

struct DenseLayer {
    Matrix w;                // out x in
    std::vector<double> b;   // out
};

struct ModelParams {
    std::vector<DenseLayer> trunk;
    std::vector<DenseLayer> mean_head;
    std::vector<DenseLayer> weight_head;
};

/// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)], seeded via rng.
[[nodiscard]] ModelParams init_params(const ModelConfig& cfg, Rng& rng);

struct ForecastOutput {
    Matrix mean;                  // N x Q
    std::vector<double> logits;   // K
    std::vector<double> weights;  // softmax(logits), sums to 1
};

/// Cached per-layer activations for the backward pass.
struct ForwardTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> trunk_pre, trunk_post;
    std::vector<std::vector<double>> mean_pre, mean_post;
    std::vector<std::vector<double>> weight_pre, weight_post;
};

[[nodiscard]] ForecastOutput forward(const ModelConfig& cfg, const ModelParams& params,
                                     const Matrix& x, ForwardTrace* trace = nullptr);

/// Same shapes as ModelParams, all zeros.
[[nodiscard]] ModelParams zero_like(const ModelParams& params);

/// Reverse-mode pass. `d_mean` and `d_logits` are the loss gradients w.r.t.
/// the forward outputs; parameter gradients are accumulated into `grads`.
void backward(const ModelConfig& cfg, const ModelParams& params, const ForwardTrace& trace,
              const Matrix& d_mean, std::span<const double> d_logits, ModelParams& grads);

}  // namespace dynmix

#endif
