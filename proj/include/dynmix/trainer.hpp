#ifndef DYNMIX_TRAINER_HPP
#define DYNMIX_TRAINER_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "dynmix/data.hpp"
#include "dynmix/mixture.hpp"
#include "dynmix/model.hpp"

#include "json.hpp"

namespace dynmix {

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double rho = 0.001;
    BaseLoss base = BaseLoss::mse;
    std::size_t k = 1;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 10;
    bool deterministic = true;
    /// Learning rate for the Cholesky parameters; < 0 means learning_rate.
    double factor_learning_rate = -1.0;
    /// Ablations: keep factors frozen at identity, or train the diagonal only.
    bool freeze_factors = false;
    bool diagonal_factors = false;

    std::size_t hidden_width = 64;
    std::size_t hidden_depth = 2;
    std::size_t head_width = 64;
    Activation activation = Activation::relu;

    void validate() const;
    static TrainConfig from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Diagonal initialization: every factor starts as the identity.
[[nodiscard]] MixtureBank init_bank(std::size_t n, std::size_t q, std::size_t k);

/// Which kind of scalar a flat parameter slot holds.
enum class ParamClass { network, factor_lower, factor_diag };

/// Canonical flat view over all trainable scalars (network first, then each
/// component's spatial strict-lower / log-diag, temporal strict-lower /
/// log-diag). Gradient packing uses the identical order.
[[nodiscard]] std::vector<double*> param_refs(ModelParams& params, MixtureBank& bank);
[[nodiscard]] std::vector<ParamClass> param_classes(const ModelParams& params,
                                                    const MixtureBank& bank);
[[nodiscard]] std::vector<double> pack_grads(const ModelParams& model_grads,
                                             const std::vector<ComponentGrad>& bank_grads);

struct OptState {
    std::vector<double> m, v;
    std::uint64_t t = 0;
};

/// One optimizer update over the flat parameter view. `lr_scale` multiplies
/// the learning rate per slot (1.0 everywhere for a plain step).
void optimizer_step(const std::vector<double*>& params, const std::vector<double>& grads,
                    const std::vector<double>& lr_scale, OptState& state, const TrainConfig& cfg);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_nll = 0.0;
    double val_rmse = 0.0;
};

struct TrainResult {
    ModelConfig config;
    ModelParams params;  // validation-best snapshot
    MixtureBank bank;    // validation-best snapshot
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
};

/// Thrown when a non-finite loss is encountered; names the batch and term.
class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] TrainResult train(const WindowedDataset& train_set, const WindowedDataset& val_set,
                                const TrainConfig& cfg);

}  // namespace dynmix

#endif
