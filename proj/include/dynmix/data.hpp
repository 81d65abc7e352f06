#ifndef DYNMIX_DATA_HPP
#define DYNMIX_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dynmix/matrix.hpp"

namespace dynmix {

/// A T x N table of sensor observations at a fixed time interval.
struct SeriesTable {
    std::vector<std::int64_t> time_seconds;  // epoch seconds, strictly increasing
    std::vector<std::string> sensor_ids;
    Matrix values;  // T x N
    std::int64_t interval_seconds = 0;

    [[nodiscard]] std::size_t rows() const { return values.rows(); }
    [[nodiscard]] std::size_t sensors() const { return values.cols(); }
    [[nodiscard]] int minutes_of_day(std::size_t row) const {
        return static_cast<int>(((time_seconds[row] % 86400) + 86400) % 86400 / 60);
    }
};

std::int64_t parse_timestamp(const std::string& text);
std::string format_timestamp(std::int64_t seconds);

/// Parses "timestamp,<id1>,<id2>,..." CSV. Errors carry the 1-based file row.
SeriesTable load_series_csv(const std::filesystem::path& path);
void save_series_csv(const SeriesTable& table, const std::filesystem::path& path);

/// z-score statistics fit on the training split. Global scalar by default;
/// optionally one (mean, std) pair per sensor.
struct NormStats {
    std::vector<double> mean{0.0};
    std::vector<double> std{1.0};
    bool per_sensor = false;

    [[nodiscard]] double normalize(double v, std::size_t sensor) const {
        const std::size_t i = per_sensor ? sensor : 0;
        return (v - mean[i]) / std[i];
    }
    [[nodiscard]] double denormalize(double v, std::size_t sensor) const {
        const std::size_t i = per_sensor ? sensor : 0;
        return v * std[i] + mean[i];
    }
};

/// One training window: X holds P past columns, Y the Q future columns,
/// both z-scored, shaped sensors x steps.
struct Window {
    Matrix x;  // N x P
    Matrix y;  // N x Q
    int time_of_day_minutes = 0;  // at the first forecast step
    std::size_t start_row = 0;    // first X row in the source table
};

struct WindowedDataset {
    std::vector<Window> windows;
    std::size_t n = 0, p = 0, q = 0;
    NormStats norm;
};

struct WindowOptions {
    std::size_t p = 12;
    std::size_t q = 12;
    double train_fraction = 0.7;
    double val_fraction = 0.1;
    double test_fraction = 0.2;
    bool per_sensor_norm = false;

    void validate() const;
};

struct SplitDatasets {
    WindowedDataset train, val, test;
};

/// Stride-1 windows, split chronologically; normalization statistics are fit
/// on the training rows only and applied to all three splits.
SplitDatasets make_windows(const SeriesTable& table, const WindowOptions& opts);

}  // namespace dynmix

#endif
