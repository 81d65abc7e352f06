#include "dynmix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dynmix {

namespace {

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

BaseLoss base_from_string(const std::string& name) {
    if (name == "mse") return BaseLoss::mse;
    if (name == "mae") return BaseLoss::mae;
    throw std::invalid_argument("unknown base loss '" + name + "' (expected mse or mae)");
}

void collect_layer_refs(std::vector<DenseLayer>& layers, std::vector<double*>& out) {
    for (DenseLayer& layer : layers) {
        for (double& v : layer.w.data()) out.push_back(&v);
        for (double& v : layer.b) out.push_back(&v);
    }
}

void collect_layer_values(const std::vector<DenseLayer>& layers, std::vector<double>& out) {
    for (const DenseLayer& layer : layers) {
        for (double v : layer.w.data()) out.push_back(v);
        for (double v : layer.b) out.push_back(v);
    }
}

struct ValStats {
    double loss = 0.0;
    double nll = 0.0;
    double rmse = 0.0;
};

ValStats evaluate_split(const ModelConfig& mcfg, const ModelParams& params,
                        const MixtureBank& bank, const LossConfig& loss_cfg,
                        const WindowedDataset& ds) {
    ValStats stats;
    double sq_err = 0.0;
    std::size_t cells = 0;
    for (const Window& win : ds.windows) {
        const ForecastOutput out = forward(mcfg, params, win.x);
        const double nll_term = nll(bank, Weights{out.logits}, win.y - out.mean);
        stats.loss += (1.0 - loss_cfg.rho) * base_loss(win.y, out.mean, loss_cfg.base) +
                      loss_cfg.rho * nll_term;
        stats.nll += nll_term;
        for (std::size_t i = 0; i < win.y.rows(); ++i)
            for (std::size_t j = 0; j < win.y.cols(); ++j) {
                const double d = ds.norm.denormalize(out.mean(i, j), i) -
                                 ds.norm.denormalize(win.y(i, j), i);
                sq_err += d * d;
                ++cells;
            }
    }
    const double count = static_cast<double>(ds.windows.size());
    stats.loss /= count;
    stats.nll /= count;
    stats.rmse = std::sqrt(sq_err / static_cast<double>(cells));
    return stats;
}

}  // namespace

void TrainConfig::validate() const {
    std::ostringstream bad;
    if (epochs == 0) bad << " epochs";
    if (batch_size == 0) bad << " batch_size";
    if (!(learning_rate > 0.0)) bad << " learning_rate";
    if (!(rho >= 0.0 && rho <= 1.0)) bad << " rho(must be in [0,1])";
    if (k == 0) bad << " k";
    if (hidden_width == 0) bad << " hidden_width";
    if (hidden_depth == 0) bad << " hidden_depth";
    if (head_width == 0) bad << " head_width";
    if (!(beta1 >= 0.0 && beta1 < 1.0)) bad << " beta1";
    if (!(beta2 >= 0.0 && beta2 < 1.0)) bad << " beta2";
    if (!(eps > 0.0)) bad << " eps";
    if (freeze_factors && diagonal_factors) bad << " freeze_factors+diagonal_factors(exclusive)";
    if (!bad.str().empty()) {
        throw std::invalid_argument("invalid train config fields:" + bad.str());
    }
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.optimizer = optimizer_from_string(j.value("optimizer", std::string("adam")));
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.eps = j.value("eps", cfg.eps);
    cfg.rho = j.value("rho", cfg.rho);
    cfg.base = base_from_string(j.value("base", std::string("mse")));
    cfg.k = j.value("k", cfg.k);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.early_stop_patience = j.value("early_stop_patience", cfg.early_stop_patience);
    cfg.deterministic = j.value("deterministic", cfg.deterministic);
    cfg.factor_learning_rate = j.value("factor_learning_rate", cfg.factor_learning_rate);
    cfg.freeze_factors = j.value("freeze_factors", cfg.freeze_factors);
    cfg.diagonal_factors = j.value("diagonal_factors", cfg.diagonal_factors);
    cfg.hidden_width = j.value("hidden_width", cfg.hidden_width);
    cfg.hidden_depth = j.value("hidden_depth", cfg.hidden_depth);
    cfg.head_width = j.value("head_width", cfg.head_width);
    cfg.activation = activation_from_string(j.value("activation", std::string("relu")));
    cfg.validate();
    return cfg;
}

nlohmann::json TrainConfig::to_json() const {
    return {{"epochs", epochs},
            {"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"optimizer", optimizer == OptimizerKind::adam ? "adam" : "sgd"},
            {"beta1", beta1},
            {"beta2", beta2},
            {"eps", eps},
            {"rho", rho},
            {"base", base == BaseLoss::mse ? "mse" : "mae"},
            {"k", k},
            {"seed", seed},
            {"early_stop_patience", early_stop_patience},
            {"deterministic", deterministic},
            {"factor_learning_rate", factor_learning_rate},
            {"freeze_factors", freeze_factors},
            {"diagonal_factors", diagonal_factors},
            {"hidden_width", hidden_width},
            {"hidden_depth", hidden_depth},
            {"head_width", head_width},
            {"activation", to_string(activation)}};
}

MixtureBank init_bank(std::size_t n, std::size_t q, std::size_t k) {
    if (n == 0 || q == 0 || k == 0) {
        throw std::invalid_argument("init_bank dimensions must be positive");
    }
    MixtureBank bank;
    bank.components.reserve(k);
    for (std::size_t i = 0; i < k; ++i) bank.components.push_back(MatnormComponent::identity(n, q));
    return bank;
}

std::vector<double*> param_refs(ModelParams& params, MixtureBank& bank) {
    std::vector<double*> refs;
    collect_layer_refs(params.trunk, refs);
    collect_layer_refs(params.mean_head, refs);
    collect_layer_refs(params.weight_head, refs);
    for (MatnormComponent& comp : bank.components) {
        for (double& v : comp.spatial.strict_lower()) refs.push_back(&v);
        for (double& v : comp.spatial.log_diags()) refs.push_back(&v);
        for (double& v : comp.temporal.strict_lower()) refs.push_back(&v);
        for (double& v : comp.temporal.log_diags()) refs.push_back(&v);
    }
    return refs;
}

std::vector<ParamClass> param_classes(const ModelParams& params, const MixtureBank& bank) {
    std::vector<ParamClass> classes;
    auto count_layers = [](const std::vector<DenseLayer>& layers) {
        std::size_t total = 0;
        for (const DenseLayer& layer : layers) total += layer.w.size() + layer.b.size();
        return total;
    };
    const std::size_t network = count_layers(params.trunk) + count_layers(params.mean_head) +
                                count_layers(params.weight_head);
    classes.assign(network, ParamClass::network);
    for (const MatnormComponent& comp : bank.components) {
        classes.insert(classes.end(), comp.spatial.strict_lower().size(), ParamClass::factor_lower);
        classes.insert(classes.end(), comp.spatial.log_diags().size(), ParamClass::factor_diag);
        classes.insert(classes.end(), comp.temporal.strict_lower().size(),
                       ParamClass::factor_lower);
        classes.insert(classes.end(), comp.temporal.log_diags().size(), ParamClass::factor_diag);
    }
    return classes;
}

std::vector<double> pack_grads(const ModelParams& model_grads,
                               const std::vector<ComponentGrad>& bank_grads) {
    std::vector<double> flat;
    collect_layer_values(model_grads.trunk, flat);
    collect_layer_values(model_grads.mean_head, flat);
    collect_layer_values(model_grads.weight_head, flat);
    for (const ComponentGrad& cg : bank_grads) {
        flat.insert(flat.end(), cg.spatial.strict_lower.begin(), cg.spatial.strict_lower.end());
        flat.insert(flat.end(), cg.spatial.log_diag.begin(), cg.spatial.log_diag.end());
        flat.insert(flat.end(), cg.temporal.strict_lower.begin(), cg.temporal.strict_lower.end());
        flat.insert(flat.end(), cg.temporal.log_diag.begin(), cg.temporal.log_diag.end());
    }
    return flat;
}

void optimizer_step(const std::vector<double*>& params, const std::vector<double>& grads,
                    const std::vector<double>& lr_scale, OptState& state, const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != lr_scale.size()) {
        throw std::invalid_argument("optimizer_step: parameter/gradient size mismatch");
    }
    if (cfg.optimizer == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            *params[i] -= cfg.learning_rate * lr_scale[i] * grads[i];
        }
        return;
    }
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        *params[i] -= cfg.learning_rate * lr_scale[i] * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

TrainResult train(const WindowedDataset& train_set, const WindowedDataset& val_set,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.windows.empty() || val_set.windows.empty()) {
        throw std::invalid_argument("train and validation splits must be non-empty");
    }

    ModelConfig mcfg;
    mcfg.n = train_set.n;
    mcfg.p = train_set.p;
    mcfg.q = train_set.q;
    mcfg.k = cfg.k;
    mcfg.hidden_width = cfg.hidden_width;
    mcfg.hidden_depth = cfg.hidden_depth;
    mcfg.head_width = cfg.head_width;
    mcfg.activation = cfg.activation;

    Rng rng(cfg.seed);
    ModelParams params = init_params(mcfg, rng);
    MixtureBank bank = init_bank(mcfg.n, mcfg.q, cfg.k);
    const LossConfig loss_cfg{cfg.rho, cfg.base};

    const std::vector<double*> refs = param_refs(params, bank);
    const std::vector<ParamClass> classes = param_classes(params, bank);
    std::vector<double> lr_scale(refs.size(), 1.0);
    if (cfg.factor_learning_rate >= 0.0) {
        const double ratio = cfg.factor_learning_rate / cfg.learning_rate;
        for (std::size_t i = 0; i < classes.size(); ++i) {
            if (classes[i] != ParamClass::network) lr_scale[i] = ratio;
        }
    }
    OptState opt_state;

    TrainResult result;
    result.config = mcfg;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    ModelParams best_params = params;
    MixtureBank best_bank = bank;
    std::size_t epochs_since_best = 0;

    std::vector<std::size_t> order(train_set.windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            const double inv = 1.0 / static_cast<double>(end - begin);

            ModelParams model_grads = zero_like(params);
            std::vector<ComponentGrad> bank_grads;
            double batch_base = 0.0;
            double batch_nll = 0.0;
            ForwardTrace trace;
            for (std::size_t wi = begin; wi < end; ++wi) {
                const Window& win = train_set.windows[order[wi]];
                const ForecastOutput out = forward(mcfg, params, win.x, &trace);
                const Weights weights{out.logits};
                batch_base += base_loss(win.y, out.mean, cfg.base);
                batch_nll += nll(bank, weights, win.y - out.mean);
                LossGrad lg = grad(win.y, out.mean, bank, weights, loss_cfg);
                lg.mean *= inv;
                for (double& v : lg.logits) v *= inv;
                backward(mcfg, params, trace, lg.mean, lg.logits, model_grads);
                if (bank_grads.empty()) {
                    bank_grads = std::move(lg.components);
                    for (ComponentGrad& cg : bank_grads) {
                        for (double& v : cg.spatial.strict_lower) v *= inv;
                        for (double& v : cg.spatial.log_diag) v *= inv;
                        for (double& v : cg.temporal.strict_lower) v *= inv;
                        for (double& v : cg.temporal.log_diag) v *= inv;
                    }
                } else {
                    for (std::size_t k = 0; k < bank_grads.size(); ++k) {
                        ComponentGrad& acc = bank_grads[k];
                        const ComponentGrad& cg = lg.components[k];
                        for (std::size_t i = 0; i < acc.spatial.strict_lower.size(); ++i)
                            acc.spatial.strict_lower[i] += inv * cg.spatial.strict_lower[i];
                        for (std::size_t i = 0; i < acc.spatial.log_diag.size(); ++i)
                            acc.spatial.log_diag[i] += inv * cg.spatial.log_diag[i];
                        for (std::size_t i = 0; i < acc.temporal.strict_lower.size(); ++i)
                            acc.temporal.strict_lower[i] += inv * cg.temporal.strict_lower[i];
                        for (std::size_t i = 0; i < acc.temporal.log_diag.size(); ++i)
                            acc.temporal.log_diag[i] += inv * cg.temporal.log_diag[i];
                    }
                }
            }

            batch_base *= inv;
            batch_nll *= inv;
            if (!std::isfinite(batch_base) || !std::isfinite(batch_nll)) {
                std::ostringstream msg;
                msg << "non-finite " << (std::isfinite(batch_base) ? "nll" : "base")
                    << " loss in epoch " << epoch << ", batch " << batch_index;
                throw TrainError(msg.str());
            }
            epoch_loss += ((1.0 - cfg.rho) * batch_base + cfg.rho * batch_nll) *
                          static_cast<double>(end - begin);

            std::vector<double> flat = pack_grads(model_grads, bank_grads);
            if (cfg.freeze_factors || cfg.diagonal_factors) {
                for (std::size_t i = 0; i < flat.size(); ++i) {
                    const bool masked =
                        cfg.freeze_factors ? classes[i] != ParamClass::network
                                           : classes[i] == ParamClass::factor_lower;
                    if (masked) flat[i] = 0.0;
                }
            }
            optimizer_step(refs, flat, lr_scale, opt_state, cfg);
        }

        const ValStats val = evaluate_split(mcfg, params, bank, loss_cfg, val_set);
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss / static_cast<double>(order.size());
        record.val_loss = val.loss;
        record.val_nll = val.nll;
        record.val_rmse = val.rmse;
        result.history.push_back(record);
        if (!std::isfinite(val.loss)) {
            std::ostringstream msg;
            msg << "non-finite validation loss after epoch " << epoch;
            throw TrainError(msg.str());
        }

        if (val.loss < result.best_val_loss) {
            result.best_val_loss = val.loss;
            result.best_epoch = epoch;
            best_params = params;
            best_bank = bank;
            epochs_since_best = 0;
        } else if (++epochs_since_best >= cfg.early_stop_patience) {
            break;
        }
    }

    result.params = std::move(best_params);
    result.bank = std::move(best_bank);
    return result;
}

}  // namespace dynmix
