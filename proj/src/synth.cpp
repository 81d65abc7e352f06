#include "dynmix/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dynmix {

namespace {
constexpr double kTwoPi = 6.283185307179586477;

FactorSpec factor_spec_from_json(const nlohmann::json& j) {
    FactorSpec spec;
    const std::string kind = j.value("kind", "identity");
    if (kind == "identity") {
        spec.kind = FactorSpec::Kind::identity;
    } else if (kind == "ar1") {
        spec.kind = FactorSpec::Kind::ar1;
        spec.rho = j.at("rho").get<double>();
    } else if (kind == "explicit") {
        spec.kind = FactorSpec::Kind::explicit_chol;
        spec.log_diag = j.at("log_diag").get<std::vector<double>>();
        spec.strict_lower = j.at("strict_lower").get<std::vector<double>>();
    } else {
        throw std::invalid_argument("unknown factor kind '" + kind + "'");
    }
    spec.scale = j.value("scale", 1.0);
    return spec;
}

nlohmann::json factor_spec_to_json(const FactorSpec& spec) {
    nlohmann::json j;
    switch (spec.kind) {
        case FactorSpec::Kind::identity:
            j["kind"] = "identity";
            j["scale"] = spec.scale;
            break;
        case FactorSpec::Kind::ar1:
            j["kind"] = "ar1";
            j["rho"] = spec.rho;
            j["scale"] = spec.scale;
            break;
        case FactorSpec::Kind::explicit_chol:
            j["kind"] = "explicit";
            j["log_diag"] = spec.log_diag;
            j["strict_lower"] = spec.strict_lower;
            break;
    }
    return j;
}

}  // namespace

CholFactor FactorSpec::build(std::size_t dim) const {
    switch (kind) {
        case Kind::identity: {
            if (scale <= 0.0) throw std::invalid_argument("factor scale must be positive");
            CholFactor f(dim);
            for (std::size_t i = 0; i < dim; ++i) f.log_diag(i) = -std::log(scale);
            return f;
        }
        case Kind::ar1: {
            if (scale <= 0.0) throw std::invalid_argument("factor scale must be positive");
            if (std::abs(rho) >= 1.0) throw std::invalid_argument("ar1 rho must be in (-1, 1)");
            // Closed-form tridiagonal precision of an AR(1) covariance
            // scale^2 * rho^{|i-j|}, then one small Cholesky.
            Matrix lambda(dim, dim);
            const double c = 1.0 / (scale * scale * (1.0 - rho * rho));
            for (std::size_t i = 0; i < dim; ++i) {
                lambda(i, i) = (i == 0 || i + 1 == dim) && dim > 1 ? c : c * (1.0 + rho * rho);
                if (dim == 1) lambda(i, i) = 1.0 / (scale * scale);
                if (i + 1 < dim) {
                    lambda(i, i + 1) = -c * rho;
                    lambda(i + 1, i) = -c * rho;
                }
            }
            return CholFactor::from_dense_lower(dense_cholesky(lambda));
        }
        case Kind::explicit_chol: {
            return CholFactor(dim, strict_lower, log_diag);
        }
    }
    throw std::logic_error("unreachable factor kind");
}

void SynthSpec::validate() const {
    std::ostringstream bad;
    if (n == 0) bad << " n";
    if (p == 0) bad << " p";
    if (q == 0) bad << " q";
    if (k_true == 0) bad << " k_true";
    if (days == 0) bad << " days";
    if (interval_minutes <= 0 || 1440 % interval_minutes != 0) bad << " interval_minutes";
    if (components.size() != k_true) bad << " components(count must equal k_true)";
    if (schedule.empty()) bad << " schedule";
    for (const RegimeBucket& bucket : schedule) {
        if (bucket.start_minute < 0 || bucket.end_minute > 1440 ||
            bucket.start_minute >= bucket.end_minute) {
            bad << " schedule(bucket range)";
            break;
        }
        if (bucket.weights.size() != k_true) {
            bad << " schedule(weights length must equal k_true)";
            break;
        }
        double sum = 0.0;
        for (double w : bucket.weights) {
            if (w < 0.0) bad << " schedule(negative weight)";
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            bad << " schedule(weights must sum to 1)";
            break;
        }
    }
    if (!bad.str().empty()) {
        throw std::invalid_argument("invalid synth spec fields:" + bad.str());
    }
    // Every minute of the day must land in exactly one bucket.
    for (int minute = 0; minute < 1440; ++minute) {
        int hits = 0;
        for (const RegimeBucket& bucket : schedule) {
            if (minute >= bucket.start_minute && minute < bucket.end_minute) ++hits;
        }
        if (hits != 1) {
            std::ostringstream msg;
            msg << "invalid synth spec fields: schedule(minute " << minute << " covered by " << hits
                << " buckets)";
            throw std::invalid_argument(msg.str());
        }
    }
}

const std::vector<double>& SynthSpec::weights_at(int minute_of_day) const {
    for (const RegimeBucket& bucket : schedule) {
        if (minute_of_day >= bucket.start_minute && minute_of_day < bucket.end_minute) {
            return bucket.weights;
        }
    }
    throw std::logic_error("schedule does not cover minute of day");
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
    SynthSpec spec;
    spec.n = j.at("n").get<std::size_t>();
    spec.p = j.at("p").get<std::size_t>();
    spec.q = j.at("q").get<std::size_t>();
    spec.k_true = j.at("k_true").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.days = j.value("days", std::size_t{3});
    spec.interval_minutes = j.value("interval_minutes", 5);
    spec.start_timestamp = j.value("start", std::string("2023-05-01T00:00:00"));
    if (j.contains("signal")) {
        const nlohmann::json& sig = j.at("signal");
        spec.signal_base = sig.value("base", 0.0);
        for (const nlohmann::json& h : sig.value("harmonics", nlohmann::json::array())) {
            spec.harmonics.push_back(
                {h.at("amplitude").get<double>(), h.value("cycles_per_day", 1)});
        }
    }
    for (const nlohmann::json& b : j.at("schedule")) {
        spec.schedule.push_back({b.at("start_minute").get<int>(), b.at("end_minute").get<int>(),
                                 b.at("weights").get<std::vector<double>>()});
    }
    for (const nlohmann::json& c : j.at("components")) {
        spec.components.emplace_back(factor_spec_from_json(c.at("spatial")),
                                     factor_spec_from_json(c.at("temporal")));
    }
    spec.validate();
    return spec;
}

nlohmann::json SynthSpec::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["p"] = p;
    j["q"] = q;
    j["k_true"] = k_true;
    j["seed"] = seed;
    j["days"] = days;
    j["interval_minutes"] = interval_minutes;
    j["start"] = start_timestamp;
    nlohmann::json harmonics_json = nlohmann::json::array();
    for (const Harmonic& h : harmonics) {
        harmonics_json.push_back({{"amplitude", h.amplitude}, {"cycles_per_day", h.cycles_per_day}});
    }
    j["signal"] = {{"base", signal_base}, {"harmonics", harmonics_json}};
    j["schedule"] = nlohmann::json::array();
    for (const RegimeBucket& b : schedule) {
        j["schedule"].push_back({{"start_minute", b.start_minute},
                                 {"end_minute", b.end_minute},
                                 {"weights", b.weights}});
    }
    j["components"] = nlohmann::json::array();
    for (const auto& [spatial, temporal] : components) {
        j["components"].push_back(
            {{"spatial", factor_spec_to_json(spatial)}, {"temporal", factor_spec_to_json(temporal)}});
    }
    return j;
}

SynthResult synth(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    // Per-sensor, per-harmonic phases are drawn first so the draw sequence
    // is stable against later changes to the block loop.
    std::vector<std::vector<double>> phases(spec.harmonics.size());
    for (std::size_t h = 0; h < spec.harmonics.size(); ++h) {
        phases[h].resize(spec.n);
        for (std::size_t c = 0; c < spec.n; ++c) phases[h][c] = rng.uniform(0.0, kTwoPi);
    }

    SynthResult result;
    for (const auto& [spatial, temporal] : spec.components) {
        result.true_bank.components.emplace_back(spatial.build(spec.n), temporal.build(spec.q));
    }

    const std::size_t rows_per_day = static_cast<std::size_t>(1440 / spec.interval_minutes);
    const std::size_t t_rows = spec.days * rows_per_day;
    const std::int64_t start_sec = parse_timestamp(spec.start_timestamp);
    const std::int64_t interval_sec = static_cast<std::int64_t>(spec.interval_minutes) * 60;

    SeriesTable& table = result.table;
    table.interval_seconds = interval_sec;
    table.values = Matrix(t_rows, spec.n);
    result.signal = Matrix(t_rows, spec.n);
    table.time_seconds.resize(t_rows);
    for (std::size_t c = 0; c < spec.n; ++c) {
        std::ostringstream id;
        id << "s" << c + 1;
        table.sensor_ids.push_back(id.str());
    }

    for (std::size_t i = 0; i < t_rows; ++i) {
        table.time_seconds[i] = start_sec + static_cast<std::int64_t>(i) * interval_sec;
        const double day_frac =
            static_cast<double>(i % rows_per_day) / static_cast<double>(rows_per_day);
        for (std::size_t c = 0; c < spec.n; ++c) {
            double v = spec.signal_base;
            for (std::size_t h = 0; h < spec.harmonics.size(); ++h) {
                v += spec.harmonics[h].amplitude *
                     std::sin(kTwoPi * spec.harmonics[h].cycles_per_day * day_frac + phases[h][c]);
            }
            result.signal(i, c) = v;
            table.values(i, c) = v;
        }
    }

    // One component draw and one matrix-normal residual per Q-step block.
    const std::size_t blocks = (t_rows + spec.q - 1) / spec.q;
    result.block_labels.resize(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t start = b * spec.q;
        const int minute = table.minutes_of_day(start);
        const std::vector<double>& weights = spec.weights_at(minute);
        const double u = rng.uniform(0.0, 1.0);
        std::size_t k = 0;
        double cum = 0.0;
        for (; k + 1 < weights.size(); ++k) {
            cum += weights[k];
            if (u < cum) break;
        }
        result.block_labels[b] = static_cast<int>(k);
        const Matrix residual = sample(result.true_bank.components[k], rng);
        const std::size_t len = std::min(spec.q, t_rows - start);
        for (std::size_t j = 0; j < len; ++j)
            for (std::size_t c = 0; c < spec.n; ++c) table.values(start + j, c) += residual(c, j);
    }
    return result;
}

void save_labels_csv(const std::vector<int>& labels, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write labels file: " + path.string());
    out << "window_index,component\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

std::vector<int> load_labels_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open labels file: " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<int> labels;
    std::size_t idx, comp;
    char comma;
    while (in >> idx >> comma >> comp) labels.push_back(static_cast<int>(comp));
    return labels;
}

}  // namespace dynmix
