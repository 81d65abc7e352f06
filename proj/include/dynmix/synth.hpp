#ifndef DYNMIX_SYNTH_HPP
#define DYNMIX_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dynmix/data.hpp"
#include "dynmix/mixture.hpp"

#include "json.hpp"

namespace dynmix {

/// Template for one precision Cholesky factor of the generating mixture.
struct FactorSpec {
    enum class Kind { identity, ar1, explicit_chol };
    Kind kind = Kind::identity;
    double scale = 1.0;  // marginal standard deviation (identity, ar1)
    double rho = 0.0;    // lag-1 correlation (ar1)
    std::vector<double> log_diag, strict_lower;  // explicit_chol

    [[nodiscard]] CholFactor build(std::size_t dim) const;
};

struct RegimeBucket {
    int start_minute = 0;
    int end_minute = 1440;  // exclusive
    std::vector<double> weights;
};

struct Harmonic {
    double amplitude = 0.0;
    int cycles_per_day = 1;
};

/// Recipe for a synthetic dataset: a smooth daily signal per sensor plus
/// matrix-normal noise whose component is drawn per Q-step block from a
/// time-of-day schedule.
struct SynthSpec {
    std::size_t n = 4, p = 6, q = 6;
    std::size_t k_true = 1;
    std::uint64_t seed = 0;
    std::size_t days = 3;
    int interval_minutes = 5;
    std::string start_timestamp = "2023-05-01T00:00:00";
    double signal_base = 0.0;
    std::vector<Harmonic> harmonics;
    std::vector<RegimeBucket> schedule;
    std::vector<std::pair<FactorSpec, FactorSpec>> components;  // (spatial, temporal)

    void validate() const;
    [[nodiscard]] const std::vector<double>& weights_at(int minute_of_day) const;

    static SynthSpec from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
};

struct SynthResult {
    SeriesTable table;
    Matrix signal;                  // T x N deterministic part
    std::vector<int> block_labels;  // component drawn per Q-step block
    MixtureBank true_bank;
};

/// Deterministic given spec.seed.
[[nodiscard]] SynthResult synth(const SynthSpec& spec);

void save_labels_csv(const std::vector<int>& labels, const std::filesystem::path& path);
[[nodiscard]] std::vector<int> load_labels_csv(const std::filesystem::path& path);

}  // namespace dynmix

#endif
