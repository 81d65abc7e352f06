#include "dynmix/evaluation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dynmix {

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json per_horizon = nlohmann::json::array();
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        per_horizon.push_back({{"horizon", horizons[i]},
                               {"rmse", rmse[i]},
                               {"mape_percent", mape[i]},
                               {"mae", mae[i]}});
    }
    return {{"horizons", per_horizon},
            {"mean_nll", mean_nll},
            {"n_windows", n_windows},
            {"n_dims", n_dims},
            {"mape_excluded_cells", mape_excluded}};
}

MetricsReport metrics(const std::vector<Matrix>& pred, const std::vector<Matrix>& truth,
                      const std::vector<std::size_t>& horizons) {
    if (pred.empty() || pred.size() != truth.size()) {
        throw std::invalid_argument("metrics needs matching non-empty prediction/truth lists");
    }
    const std::size_t n = truth.front().rows();
    const std::size_t q = truth.front().cols();
    for (std::size_t w = 0; w < pred.size(); ++w) {
        require_shape(pred[w], n, q, "prediction window");
        require_shape(truth[w], n, q, "truth window");
    }
    for (std::size_t h : horizons) {
        if (h < 1 || h > q) {
            std::ostringstream msg;
            msg << "horizon " << h << " outside [1, " << q << "]";
            throw std::invalid_argument(msg.str());
        }
    }

    MetricsReport report;
    report.horizons = horizons;
    report.n_windows = pred.size();
    report.n_dims = n * q;
    for (std::size_t h : horizons) {
        const std::size_t j = h - 1;
        double sq = 0.0, abs_sum = 0.0, pct_sum = 0.0;
        std::size_t cells = 0, pct_cells = 0;
        for (std::size_t w = 0; w < pred.size(); ++w) {
            for (std::size_t i = 0; i < n; ++i) {
                const double err = pred[w](i, j) - truth[w](i, j);
                sq += err * err;
                abs_sum += std::abs(err);
                ++cells;
                if (std::abs(truth[w](i, j)) > kMapeMaskThreshold) {
                    pct_sum += std::abs(err) / std::abs(truth[w](i, j));
                    ++pct_cells;
                } else {
                    ++report.mape_excluded;
                }
            }
        }
        report.rmse.push_back(std::sqrt(sq / static_cast<double>(cells)));
        report.mae.push_back(abs_sum / static_cast<double>(cells));
        report.mape.push_back(pct_cells == 0 ? 0.0
                                             : 100.0 * pct_sum / static_cast<double>(pct_cells));
    }
    return report;
}

double eval_nll(const ModelConfig& cfg, const ModelParams& params, const MixtureBank& bank,
                const WindowedDataset& ds) {
    if (ds.windows.empty()) {
        throw std::invalid_argument("eval_nll needs a non-empty dataset");
    }
    double acc = 0.0;
    for (const Window& win : ds.windows) {
        const ForecastOutput out = forward(cfg, params, win.x);
        acc += nll(bank, Weights{out.logits}, win.y - out.mean);
    }
    return acc / static_cast<double>(ds.windows.size());
}

std::vector<WeightRecord> weight_trajectory(const ModelConfig& cfg, const ModelParams& params,
                                            const WindowedDataset& ds) {
    std::vector<WeightRecord> records;
    records.reserve(ds.windows.size());
    for (const Window& win : ds.windows) {
        const ForecastOutput out = forward(cfg, params, win.x);
        records.push_back({win.time_of_day_minutes, out.weights});
    }
    return records;
}

std::vector<std::size_t> default_horizons(std::size_t q) {
    std::vector<std::size_t> horizons;
    for (std::size_t h : {std::size_t{3}, std::size_t{6}, std::size_t{9}, std::size_t{12}}) {
        if (h <= q) horizons.push_back(h);
    }
    if (horizons.empty()) {
        for (std::size_t h = 1; h <= q; ++h) horizons.push_back(h);
    }
    return horizons;
}

}  // namespace dynmix
