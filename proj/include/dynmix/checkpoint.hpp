#ifndef DYNMIX_CHECKPOINT_HPP
#define DYNMIX_CHECKPOINT_HPP

#include <filesystem>

#include "dynmix/data.hpp"
#include "dynmix/mixture.hpp"
#include "dynmix/model.hpp"

#include "json.hpp"

namespace dynmix {

inline constexpr int kCheckpointMajor = 1;
inline constexpr int kCheckpointMinor = 0;

/// Everything needed to run a trained model: architecture, parameters, the
/// mixture bank, and the normalization fitted on the training split.
struct Checkpoint {
    ModelConfig config;
    ModelParams params;
    MixtureBank bank;
    NormStats norm;
};

[[nodiscard]] nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
/// Throws std::runtime_error on a format-version major mismatch.
[[nodiscard]] Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dynmix

#endif
