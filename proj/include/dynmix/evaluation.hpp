#ifndef DYNMIX_EVALUATION_HPP
#define DYNMIX_EVALUATION_HPP

#include <vector>

#include "dynmix/data.hpp"
#include "dynmix/mixture.hpp"
#include "dynmix/model.hpp"

#include "json.hpp"

namespace dynmix {

/// Near-zero truth values are excluded from MAPE; their count is reported.
inline constexpr double kMapeMaskThreshold = 1e-6;

struct MetricsReport {
    std::vector<std::size_t> horizons;  // 1-based step indices
    std::vector<double> rmse, mape, mae;  // de-normalized units; mape in percent
    double mean_nll = 0.0;  // nats per window
    std::size_t n_windows = 0;
    std::size_t n_dims = 0;  // N*Q, for rescaling mean_nll
    std::size_t mape_excluded = 0;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Per-horizon accuracy over de-normalized predictions and targets
/// (each element is an N x Q window).
[[nodiscard]] MetricsReport metrics(const std::vector<Matrix>& pred,
                                    const std::vector<Matrix>& truth,
                                    const std::vector<std::size_t>& horizons);

/// Mean mixture NLL per window over the dataset, on normalized residuals
/// with per-window weights from the model.
[[nodiscard]] double eval_nll(const ModelConfig& cfg, const ModelParams& params,
                              const MixtureBank& bank, const WindowedDataset& ds);

struct WeightRecord {
    int time_of_day_minutes = 0;
    std::vector<double> weights;
};

[[nodiscard]] std::vector<WeightRecord> weight_trajectory(const ModelConfig& cfg,
                                                          const ModelParams& params,
                                                          const WindowedDataset& ds);

/// Default evaluation horizons: {3, 6, 9, 12} clipped to [1, q], or all
/// steps when none of those fit.
[[nodiscard]] std::vector<std::size_t> default_horizons(std::size_t q);

}  // namespace dynmix

#endif
