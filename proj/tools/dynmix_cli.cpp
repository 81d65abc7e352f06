#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dynmix/artifacts.hpp"
#include "dynmix/checkpoint.hpp"
#include "dynmix/data.hpp"
#include "dynmix/evaluation.hpp"
#include "dynmix/synth.hpp"
#include "dynmix/trainer.hpp"

namespace fs = std::filesystem;

namespace {

nlohmann::json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

std::vector<double> parse_splits(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(std::stod(field));
    if (out.size() != 3) {
        throw std::runtime_error("--splits expects three comma-separated fractions");
    }
    return out;
}

int run_synth(const fs::path& spec_path, const fs::path& out_dir,
              std::optional<std::uint64_t> seed) {
    dynmix::SynthSpec spec = dynmix::SynthSpec::from_json(load_json(spec_path));
    if (seed) spec.seed = *seed;
    const dynmix::SynthResult result = dynmix::synth(spec);

    fs::create_directories(out_dir);
    dynmix::save_series_csv(result.table, out_dir / "series.csv");
    dynmix::save_labels_csv(result.block_labels, out_dir / "labels.csv");
    std::ofstream echo(out_dir / "spec.json");
    echo << spec.to_json().dump(2) << '\n';

    std::cout << "wrote " << result.table.rows() << " rows x " << result.table.sensors()
              << " sensors to " << (out_dir / "series.csv").string() << '\n';
    return 0;
}

int run_train(const fs::path& data_path, const fs::path& config_path, const fs::path& out_dir,
              std::optional<std::uint64_t> seed, std::optional<double> rho,
              std::optional<std::size_t> k, std::optional<std::size_t> p,
              std::optional<std::size_t> q, const std::string& splits,
              std::optional<bool> deterministic, bool per_sensor_norm) {
    nlohmann::json config_json =
        config_path.empty() ? nlohmann::json::object() : load_json(config_path);
    if (seed) config_json["seed"] = *seed;
    if (rho) config_json["rho"] = *rho;
    if (k) config_json["k"] = *k;
    if (deterministic) config_json["deterministic"] = *deterministic;
    const dynmix::TrainConfig cfg = dynmix::TrainConfig::from_json(config_json);

    dynmix::WindowOptions wopts;
    wopts.p = p.value_or(config_json.value("p", std::size_t{12}));
    wopts.q = q.value_or(config_json.value("q", std::size_t{12}));
    if (!splits.empty()) {
        const std::vector<double> f = parse_splits(splits);
        wopts.train_fraction = f[0];
        wopts.val_fraction = f[1];
        wopts.test_fraction = f[2];
    } else if (config_json.contains("splits")) {
        const auto f = config_json.at("splits").get<std::vector<double>>();
        if (f.size() != 3) throw std::runtime_error("config splits must have three fractions");
        wopts.train_fraction = f[0];
        wopts.val_fraction = f[1];
        wopts.test_fraction = f[2];
    }
    wopts.per_sensor_norm = per_sensor_norm || config_json.value("per_sensor_norm", false);

    const dynmix::SeriesTable table = dynmix::load_series_csv(data_path);
    const dynmix::SplitDatasets splits_ds = dynmix::make_windows(table, wopts);
    std::cout << "windows: train " << splits_ds.train.windows.size() << ", val "
              << splits_ds.val.windows.size() << ", test " << splits_ds.test.windows.size()
              << '\n';

    const dynmix::TrainResult result = dynmix::train(splits_ds.train, splits_ds.val, cfg);
    std::cout << "best epoch " << result.best_epoch << ", val loss " << result.best_val_loss
              << '\n';

    fs::create_directories(out_dir);
    const fs::path ckpt_path = out_dir / "checkpoint.json";
    const fs::path history_path = out_dir / "history.csv";
    dynmix::save_checkpoint({result.config, result.params, result.bank, splits_ds.train.norm},
                            ckpt_path);
    dynmix::write_history_csv(result.history, history_path);

    nlohmann::json snapshot = cfg.to_json();
    snapshot["p"] = wopts.p;
    snapshot["q"] = wopts.q;
    snapshot["splits"] = {wopts.train_fraction, wopts.val_fraction, wopts.test_fraction};
    snapshot["per_sensor_norm"] = wopts.per_sensor_norm;
    dynmix::write_manifest(snapshot, cfg.seed, dynmix::fnv1a_file(data_path), ckpt_path,
                           history_path, out_dir / "manifest.json");
    return 0;
}

int run_eval(const fs::path& ckpt_path, const fs::path& data_path, const fs::path& out_dir,
             const std::string& horizons_arg, const std::string& splits) {
    const dynmix::Checkpoint ckpt = dynmix::load_checkpoint(ckpt_path);
    const dynmix::SeriesTable table = dynmix::load_series_csv(data_path);
    if (table.sensors() != ckpt.config.n) {
        std::ostringstream msg;
        msg << "checkpoint/data dimension mismatch: checkpoint has N=" << ckpt.config.n << ", P="
            << ckpt.config.p << ", Q=" << ckpt.config.q << "; data has N=" << table.sensors();
        throw std::runtime_error(msg.str());
    }

    // Window with the checkpoint's P/Q; evaluation runs on the test split,
    // normalized with the checkpoint's training statistics.
    dynmix::WindowOptions wopts;
    wopts.p = ckpt.config.p;
    wopts.q = ckpt.config.q;
    if (!splits.empty()) {
        const std::vector<double> f = parse_splits(splits);
        wopts.train_fraction = f[0];
        wopts.val_fraction = f[1];
        wopts.test_fraction = f[2];
    }
    wopts.per_sensor_norm = ckpt.norm.per_sensor;
    dynmix::SplitDatasets ds = dynmix::make_windows(table, wopts);
    auto renormalize = [&](dynmix::WindowedDataset& split) {
        for (dynmix::Window& win : split.windows) {
            for (std::size_t i = 0; i < split.n; ++i) {
                for (std::size_t j = 0; j < split.p; ++j)
                    win.x(i, j) = ckpt.norm.normalize(split.norm.denormalize(win.x(i, j), i), i);
                for (std::size_t j = 0; j < split.q; ++j)
                    win.y(i, j) = ckpt.norm.normalize(split.norm.denormalize(win.y(i, j), i), i);
            }
        }
        split.norm = ckpt.norm;
    };
    renormalize(ds.test);
    const dynmix::WindowedDataset& eval_set = ds.test;

    std::vector<std::size_t> horizons;
    if (horizons_arg.empty()) {
        horizons = dynmix::default_horizons(ckpt.config.q);
    } else {
        std::istringstream in(horizons_arg);
        std::string field;
        while (std::getline(in, field, ',')) horizons.push_back(std::stoul(field));
    }

    std::vector<dynmix::Matrix> preds, truths;
    preds.reserve(eval_set.windows.size());
    for (const dynmix::Window& win : eval_set.windows) {
        const dynmix::ForecastOutput out = dynmix::forward(ckpt.config, ckpt.params, win.x);
        dynmix::Matrix pred(ckpt.config.n, ckpt.config.q), truth(ckpt.config.n, ckpt.config.q);
        for (std::size_t i = 0; i < ckpt.config.n; ++i)
            for (std::size_t j = 0; j < ckpt.config.q; ++j) {
                pred(i, j) = ckpt.norm.denormalize(out.mean(i, j), i);
                truth(i, j) = ckpt.norm.denormalize(win.y(i, j), i);
            }
        preds.push_back(std::move(pred));
        truths.push_back(std::move(truth));
    }

    dynmix::MetricsReport report = dynmix::metrics(preds, truths, horizons);
    report.mean_nll = dynmix::eval_nll(ckpt.config, ckpt.params, ckpt.bank, eval_set);

    fs::create_directories(out_dir);
    dynmix::write_metrics_json(report, out_dir / "metrics.json");
    dynmix::write_metrics_csv(report, out_dir / "metrics.csv");
    dynmix::write_weight_trajectory_csv(
        dynmix::weight_trajectory(ckpt.config, ckpt.params, eval_set), out_dir / "weights.csv");

    std::cout << report.to_json().dump(2) << '\n';
    return 0;
}

int run_export(const fs::path& ckpt_path, const fs::path& out_dir) {
    const dynmix::Checkpoint ckpt = dynmix::load_checkpoint(ckpt_path);
    dynmix::export_covariances(ckpt, out_dir);
    std::cout << "exported " << ckpt.bank.k() << " component(s) to " << out_dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic matrix-normal mixture forecasting"};
    app.require_subcommand(1);

    std::string spec_path, data_path, config_path, ckpt_path, out_dir;
    std::string splits, horizons;
    std::optional<std::uint64_t> seed;
    std::optional<double> rho;
    std::optional<std::size_t> k, p, q;
    std::optional<bool> deterministic;
    bool per_sensor_norm = false;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic series with labels");
    synth->add_option("--spec", spec_path, "Synth spec JSON")->required();
    synth->add_option("--out", out_dir, "Output directory")->required();
    synth->add_option("--seed", seed, "Override spec seed");

    CLI::App* train = app.add_subcommand("train", "Train a model on a series CSV");
    train->add_option("--data", data_path, "Series CSV")->required();
    train->add_option("--config", config_path, "Train config JSON");
    train->add_option("--out", out_dir, "Output directory")->required();
    train->add_option("--seed", seed, "Random seed");
    train->add_option("--rho", rho, "NLL weight in the combined loss");
    train->add_option("--k", k, "Number of mixture components");
    train->add_option("--p", p, "History window length");
    train->add_option("--q", q, "Forecast horizon length");
    train->add_option("--splits", splits, "train,val,test fractions");
    train->add_option("--deterministic", deterministic, "Fixed-order reductions");
    train->add_flag("--per-sensor-norm", per_sensor_norm, "Per-sensor z-score");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a series CSV");
    eval->add_option("--checkpoint", ckpt_path, "Checkpoint JSON")->required();
    eval->add_option("--data", data_path, "Series CSV")->required();
    eval->add_option("--out", out_dir, "Output directory")->required();
    eval->add_option("--horizons", horizons, "Comma-separated step indices");
    eval->add_option("--splits", splits, "train,val,test fractions");

    CLI::App* exp = app.add_subcommand("export", "Export covariance/precision artifacts");
    exp->add_option("--checkpoint", ckpt_path, "Checkpoint JSON")->required();
    exp->add_option("--out", out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(spec_path, out_dir, seed);
        if (train->parsed())
            return run_train(data_path, config_path, out_dir, seed, rho, k, p, q, splits,
                             deterministic, per_sensor_norm);
        if (eval->parsed()) return run_eval(ckpt_path, data_path, out_dir, horizons, splits);
        if (exp->parsed()) return run_export(ckpt_path, out_dir);
    } catch (const dynmix::TrainError& e) {
        std::cerr << "training aborted: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
