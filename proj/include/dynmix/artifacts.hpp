#ifndef DYNMIX_ARTIFACTS_HPP
#define DYNMIX_ARTIFACTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dynmix/checkpoint.hpp"
#include "dynmix/evaluation.hpp"
#include "dynmix/trainer.hpp"

namespace dynmix {

inline constexpr const char* kToolVersion = "dynmix 1.0.0";

[[nodiscard]] std::uint64_t fnv1a(std::span<const char> bytes);
[[nodiscard]] std::uint64_t fnv1a_file(const std::filesystem::path& path);

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
[[nodiscard]] Matrix read_matrix_csv(const std::filesystem::path& path);

/// Per-component covariance/precision exports (CSV + SVG heatmap).
///
/// Sigma = (L L^T)^{-1} comes from two triangular solves; no general-purpose
/// inverse is invoked. For display, each temporal matrix is divided by the
/// maximum of its diagonal and the spatial matrix multiplied by the same
/// value, which leaves the Kronecker product unchanged.
void export_covariances(const Checkpoint& ckpt, const std::filesystem::path& out_dir);

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path);

void write_metrics_json(const MetricsReport& report, const std::filesystem::path& path);
void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);
void write_weight_trajectory_csv(const std::vector<WeightRecord>& records,
                                 const std::filesystem::path& path);

/// One manifest per training run: config snapshot, seed, input fingerprint,
/// and where the run's outputs live.
void write_manifest(const nlohmann::json& config_snapshot, std::uint64_t seed,
                    std::uint64_t data_fingerprint, const std::filesystem::path& checkpoint_path,
                    const std::filesystem::path& history_path, const std::filesystem::path& path);

}  // namespace dynmix

#endif
