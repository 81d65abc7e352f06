#include "dynmix/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace dynmix {

namespace {

nlohmann::json layer_to_json(const DenseLayer& layer) {
    return {{"rows", layer.w.rows()},
            {"cols", layer.w.cols()},
            {"w", std::vector<double>(layer.w.data().begin(), layer.w.data().end())},
            {"b", layer.b}};
}

DenseLayer layer_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto w = j.at("w").get<std::vector<double>>();
    DenseLayer layer{Matrix(rows, cols), j.at("b").get<std::vector<double>>()};
    if (w.size() != rows * cols || layer.b.size() != rows) {
        throw std::runtime_error("checkpoint layer arrays do not match declared shape");
    }
    std::copy(w.begin(), w.end(), layer.w.data().begin());
    return layer;
}

nlohmann::json layers_to_json(const std::vector<DenseLayer>& layers) {
    nlohmann::json out = nlohmann::json::array();
    for (const DenseLayer& layer : layers) out.push_back(layer_to_json(layer));
    return out;
}

std::vector<DenseLayer> layers_from_json(const nlohmann::json& j) {
    std::vector<DenseLayer> out;
    for (const nlohmann::json& item : j) out.push_back(layer_from_json(item));
    return out;
}

nlohmann::json factor_to_json(const CholFactor& f) {
    return {{"dim", f.dim()},
            {"log_diag", std::vector<double>(f.log_diags().begin(), f.log_diags().end())},
            {"strict_lower",
             std::vector<double>(f.strict_lower().begin(), f.strict_lower().end())}};
}

CholFactor factor_from_json(const nlohmann::json& j) {
    return {j.at("dim").get<std::size_t>(), j.at("strict_lower").get<std::vector<double>>(),
            j.at("log_diag").get<std::vector<double>>()};
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
    nlohmann::json j;
    j["format_version"] = {{"major", kCheckpointMajor}, {"minor", kCheckpointMinor}};
    j["model"] = {{"n", ckpt.config.n},
                  {"p", ckpt.config.p},
                  {"q", ckpt.config.q},
                  {"k", ckpt.config.k},
                  {"hidden_width", ckpt.config.hidden_width},
                  {"hidden_depth", ckpt.config.hidden_depth},
                  {"head_width", ckpt.config.head_width},
                  {"activation", to_string(ckpt.config.activation)}};
    j["trunk"] = layers_to_json(ckpt.params.trunk);
    j["mean_head"] = layers_to_json(ckpt.params.mean_head);
    j["weight_head"] = layers_to_json(ckpt.params.weight_head);
    j["bank"] = nlohmann::json::array();
    for (const MatnormComponent& comp : ckpt.bank.components) {
        j["bank"].push_back(
            {{"spatial", factor_to_json(comp.spatial)}, {"temporal", factor_to_json(comp.temporal)}});
    }
    j["norm"] = {{"per_sensor", ckpt.norm.per_sensor}, {"mean", ckpt.norm.mean},
                 {"std", ckpt.norm.std}};
    return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    const nlohmann::json& version = j.at("format_version");
    const int major = version.at("major").get<int>();
    if (major != kCheckpointMajor) {
        std::ostringstream msg;
        msg << "incompatible checkpoint format version " << major << "." << version.value("minor", 0)
            << " (this build reads " << kCheckpointMajor << ".x)";
        throw std::runtime_error(msg.str());
    }

    const nlohmann::json& model = j.at("model");
    ModelConfig cfg;
    cfg.n = model.at("n").get<std::size_t>();
    cfg.p = model.at("p").get<std::size_t>();
    cfg.q = model.at("q").get<std::size_t>();
    cfg.k = model.at("k").get<std::size_t>();
    cfg.hidden_width = model.at("hidden_width").get<std::size_t>();
    cfg.hidden_depth = model.at("hidden_depth").get<std::size_t>();
    cfg.head_width = model.at("head_width").get<std::size_t>();
    cfg.activation = activation_from_string(model.at("activation").get<std::string>());
    cfg.validate();

    ModelParams params;
    params.trunk = layers_from_json(j.at("trunk"));
    params.mean_head = layers_from_json(j.at("mean_head"));
    params.weight_head = layers_from_json(j.at("weight_head"));

    MixtureBank bank;
    for (const nlohmann::json& comp : j.at("bank")) {
        bank.components.emplace_back(factor_from_json(comp.at("spatial")),
                                     factor_from_json(comp.at("temporal")));
    }
    bank.validate();

    NormStats norm;
    norm.per_sensor = j.at("norm").at("per_sensor").get<bool>();
    norm.mean = j.at("norm").at("mean").get<std::vector<double>>();
    norm.std = j.at("norm").at("std").get<std::vector<double>>();

    return Checkpoint{cfg, std::move(params), std::move(bank), std::move(norm)};
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << checkpoint_to_json(ckpt).dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    nlohmann::json j;
    in >> j;
    return checkpoint_from_json(j);
}

}  // namespace dynmix
