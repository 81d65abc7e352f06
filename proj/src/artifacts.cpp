#include "dynmix/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dynmix/svg.hpp"

namespace dynmix {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void export_pair(const Matrix& temporal, const Matrix& spatial, const std::string& stem_temporal,
                 const std::string& stem_spatial, const std::string& label,
                 const std::filesystem::path& out_dir) {
    double scale = 0.0;
    for (std::size_t i = 0; i < temporal.rows(); ++i) scale = std::max(scale, temporal(i, i));
    if (scale <= 0.0) scale = 1.0;
    Matrix temporal_scaled = temporal;
    temporal_scaled *= 1.0 / scale;
    Matrix spatial_scaled = spatial;
    spatial_scaled *= scale;

    write_matrix_csv(temporal_scaled, out_dir / (stem_temporal + ".csv"));
    write_matrix_csv(spatial_scaled, out_dir / (stem_spatial + ".csv"));
    write_heatmap_svg(temporal_scaled, label + " temporal", out_dir / (stem_temporal + ".svg"));
    write_heatmap_svg(spatial_scaled, label + " spatial", out_dir / (stem_spatial + ".svg"));
}

}  // namespace

std::uint64_t fnv1a(std::span<const char> bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for fingerprint: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    return fnv1a(std::span<const char>(bytes.data(), bytes.size()));
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix csv: " + path.string());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << num(m(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix csv: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty matrix csv: " + path.string());
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

void export_covariances(const Checkpoint& ckpt, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (std::size_t k = 0; k < ckpt.bank.k(); ++k) {
        const MatnormComponent& comp = ckpt.bank.components[k];
        const std::string tag = "component_" + std::to_string(k + 1);

        // Lambda = L L^T assembled from triangular products.
        const Matrix lambda_n =
            tri_mul(comp.spatial, comp.spatial.materialize(), TriSide::right_transposed);
        const Matrix lambda_q =
            tri_mul(comp.temporal, comp.temporal.materialize(), TriSide::right_transposed);
        // Sigma = L^{-T} (L^{-1} I): two triangular solves.
        const Matrix sigma_n = solve_lower_transposed(
            comp.spatial, solve_lower(comp.spatial, Matrix::identity(comp.spatial.dim())));
        const Matrix sigma_q = solve_lower_transposed(
            comp.temporal, solve_lower(comp.temporal, Matrix::identity(comp.temporal.dim())));

        export_pair(sigma_q, sigma_n, tag + "_sigma_temporal", tag + "_sigma_spatial",
                    tag + " covariance", out_dir);
        export_pair(lambda_q, lambda_n, tag + "_lambda_temporal", tag + "_lambda_spatial",
                    tag + " precision", out_dir);
    }
}

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history csv: " + path.string());
    out << "epoch,train_loss,val_loss,val_nll,val_rmse\n";
    for (const EpochRecord& r : history) {
        out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.val_loss) << ','
            << num(r.val_nll) << ',' << num(r.val_rmse) << '\n';
    }
}

void write_metrics_json(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics json: " + path.string());
    out << report.to_json().dump(2) << '\n';
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics csv: " + path.string());
    out << "horizon,rmse,mape_percent,mae\n";
    for (std::size_t i = 0; i < report.horizons.size(); ++i) {
        out << report.horizons[i] << ',' << num(report.rmse[i]) << ',' << num(report.mape[i]) << ','
            << num(report.mae[i]) << '\n';
    }
}

void write_weight_trajectory_csv(const std::vector<WeightRecord>& records,
                                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write weight trajectory csv: " + path.string());
    out << "time_of_day_minutes";
    if (!records.empty()) {
        for (std::size_t k = 0; k < records.front().weights.size(); ++k) out << ",w" << k + 1;
    }
    out << '\n';
    for (const WeightRecord& r : records) {
        out << r.time_of_day_minutes;
        for (double w : r.weights) out << ',' << num(w);
        out << '\n';
    }
}

void write_manifest(const nlohmann::json& config_snapshot, std::uint64_t seed,
                    std::uint64_t data_fingerprint, const std::filesystem::path& checkpoint_path,
                    const std::filesystem::path& history_path, const std::filesystem::path& path) {
    char fp[24];
    std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(data_fingerprint));
    const nlohmann::json manifest = {{"tool_version", kToolVersion},
                                     {"config", config_snapshot},
                                     {"seed", seed},
                                     {"data_fingerprint", fp},
                                     {"checkpoint", checkpoint_path.string()},
                                     {"history", history_path.string()}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << manifest.dump(2) << '\n';
}

}  // namespace dynmix
