#include "dynmix/data.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dynmix {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_cell(const std::string& text, std::size_t file_row, std::size_t col) {
    const std::string t = trimmed(text);
    std::size_t consumed = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &consumed);
    } catch (const std::exception&) {
        consumed = 0;
    }
    if (consumed != t.size() || t.empty() || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-numeric cell '" << text << "' at row " << file_row << ", column " << col + 2;
        throw std::invalid_argument(msg.str());
    }
    return v;
}

}  // namespace

std::int64_t parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    const int got =
        std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (got < 6 || (sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 ||
        mi > 59 || s > 60) {
        throw std::invalid_argument("invalid ISO-8601 timestamp '" + text + "'");
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t seconds) {
    std::int64_t days = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

SeriesTable load_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open series file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("empty series file: " + path.string());
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_line(line);
    if (header.size() < 2 || trimmed(header[0]) != "timestamp") {
        throw std::invalid_argument("series header must be 'timestamp,<id1>,...', got '" + line +
                                    "'");
    }

    SeriesTable table;
    for (std::size_t i = 1; i < header.size(); ++i) table.sensor_ids.push_back(trimmed(header[i]));
    const std::size_t n = table.sensor_ids.size();

    std::vector<double> cells;
    std::size_t file_row = 1;
    while (std::getline(in, line)) {
        ++file_row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != n + 1) {
            std::ostringstream msg;
            msg << "ragged row " << file_row << ": expected " << n + 1 << " fields, got "
                << fields.size();
            throw std::invalid_argument(msg.str());
        }
        std::int64_t t;
        try {
            t = parse_timestamp(trimmed(fields[0]));
        } catch (const std::invalid_argument& e) {
            std::ostringstream msg;
            msg << e.what() << " at row " << file_row;
            throw std::invalid_argument(msg.str());
        }
        if (!table.time_seconds.empty() && t <= table.time_seconds.back()) {
            std::ostringstream msg;
            msg << "timestamps must be strictly increasing; violated at row " << file_row;
            throw std::invalid_argument(msg.str());
        }
        table.time_seconds.push_back(t);
        for (std::size_t c = 0; c < n; ++c) cells.push_back(parse_cell(fields[c + 1], file_row, c));
    }

    const std::size_t rows = table.time_seconds.size();
    if (rows == 0) {
        throw std::invalid_argument("no observations in series file: " + path.string());
    }
    if (rows >= 2) {
        table.interval_seconds = table.time_seconds[1] - table.time_seconds[0];
        for (std::size_t i = 1; i + 1 < rows; ++i) {
            const std::int64_t gap = table.time_seconds[i + 1] - table.time_seconds[i];
            if (gap != table.interval_seconds) {
                std::ostringstream msg;
                msg << "irregular timestamp interval at row " << i + 3 << ": expected "
                    << table.interval_seconds << "s, got " << gap << "s";
                throw std::invalid_argument(msg.str());
            }
        }
    }

    table.values = Matrix(rows, n);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < n; ++c) table.values(i, c) = cells[i * n + c];
    return table;
}

void save_series_csv(const SeriesTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write series file: " + path.string());
    out << "timestamp";
    for (const std::string& id : table.sensor_ids) out << ',' << id;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < table.rows(); ++i) {
        out << format_timestamp(table.time_seconds[i]);
        for (std::size_t c = 0; c < table.sensors(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.6f", table.values(i, c));
            out << ',' << buf;
        }
        out << '\n';
    }
}

void WindowOptions::validate() const {
    std::ostringstream bad;
    if (p == 0) bad << " p";
    if (q == 0) bad << " q";
    const double total = train_fraction + val_fraction + test_fraction;
    if (train_fraction <= 0.0 || val_fraction < 0.0 || test_fraction < 0.0 ||
        std::abs(total - 1.0) > 1e-9) {
        bad << " splits(must sum to 1)";
    }
    if (!bad.str().empty()) {
        throw std::invalid_argument("invalid window options:" + bad.str());
    }
}

SplitDatasets make_windows(const SeriesTable& table, const WindowOptions& opts) {
    opts.validate();
    const std::size_t t = table.rows();
    const std::size_t n = table.sensors();
    const std::size_t span = opts.p + opts.q;
    if (t < span) {
        std::ostringstream msg;
        msg << "insufficient rows: need at least " << span << ", got " << t;
        throw std::invalid_argument(msg.str());
    }
    const std::size_t total = t - span + 1;
    const auto n_train = static_cast<std::size_t>(std::floor(opts.train_fraction * total));
    const auto n_val = static_cast<std::size_t>(std::floor(opts.val_fraction * total));
    if (n_train == 0) {
        throw std::invalid_argument("train split is empty; increase data or train fraction");
    }
    const std::size_t n_test = total - n_train - n_val;

    // Fit stats on the contiguous rows spanned by training windows only.
    const std::size_t train_rows = n_train + span - 1;
    NormStats norm;
    norm.per_sensor = opts.per_sensor_norm;
    const std::size_t groups = opts.per_sensor_norm ? n : 1;
    norm.mean.assign(groups, 0.0);
    norm.std.assign(groups, 0.0);
    std::vector<std::size_t> counts(groups, 0);
    for (std::size_t i = 0; i < train_rows; ++i)
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t g = opts.per_sensor_norm ? c : 0;
            norm.mean[g] += table.values(i, c);
            ++counts[g];
        }
    for (std::size_t g = 0; g < groups; ++g) norm.mean[g] /= static_cast<double>(counts[g]);
    for (std::size_t i = 0; i < train_rows; ++i)
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t g = opts.per_sensor_norm ? c : 0;
            const double d = table.values(i, c) - norm.mean[g];
            norm.std[g] += d * d;
        }
    for (std::size_t g = 0; g < groups; ++g) {
        norm.std[g] = std::sqrt(norm.std[g] / static_cast<double>(counts[g]));
        if (norm.std[g] <= 0.0) {
            throw std::invalid_argument("constant series: standard deviation is zero");
        }
    }

    auto build = [&](std::size_t begin, std::size_t count) {
        WindowedDataset ds;
        ds.n = n;
        ds.p = opts.p;
        ds.q = opts.q;
        ds.norm = norm;
        ds.windows.reserve(count);
        for (std::size_t w = begin; w < begin + count; ++w) {
            Window win;
            win.start_row = w;
            win.time_of_day_minutes = table.minutes_of_day(w + opts.p);
            win.x = Matrix(n, opts.p);
            win.y = Matrix(n, opts.q);
            for (std::size_t c = 0; c < n; ++c) {
                for (std::size_t j = 0; j < opts.p; ++j)
                    win.x(c, j) = norm.normalize(table.values(w + j, c), c);
                for (std::size_t j = 0; j < opts.q; ++j)
                    win.y(c, j) = norm.normalize(table.values(w + opts.p + j, c), c);
            }
            ds.windows.push_back(std::move(win));
        }
        return ds;
    };

    SplitDatasets out{build(0, n_train), build(n_train, n_val), build(n_train + n_val, n_test)};
    return out;
}

}  // namespace dynmix
