#include "dynmix/model.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "dynmix/mixture.hpp"

namespace dynmix {

namespace {

double act(Activation a, double v) {
    return a == Activation::relu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
}

double act_prime(Activation a, double pre) {
    if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(pre);
    return 1.0 - t * t;
}

std::vector<double> affine(const DenseLayer& layer, std::span<const double> in) {
    std::vector<double> out(layer.b);
    for (std::size_t i = 0; i < layer.w.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < layer.w.cols(); ++j) acc += layer.w(i, j) * in[j];
        out[i] += acc;
    }
    return out;
}

std::vector<double> apply_act(Activation a, std::span<const double> pre) {
    std::vector<double> out(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) out[i] = act(a, pre[i]);
    return out;
}

DenseLayer init_layer(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
    DenseLayer layer{Matrix(out_dim, in_dim), std::vector<double>(out_dim, 0.0)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (std::size_t i = 0; i < out_dim; ++i)
        for (std::size_t j = 0; j < in_dim; ++j) layer.w(i, j) = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < out_dim; ++i) layer.b[i] = rng.uniform(-bound, bound);
    return layer;
}

// g = dL/d(out); accumulates dW, db and returns dL/d(in).
std::vector<double> affine_backward(const DenseLayer& layer, std::span<const double> in,
                                    std::span<const double> g, DenseLayer& grad) {
    for (std::size_t i = 0; i < layer.w.rows(); ++i) {
        grad.b[i] += g[i];
        for (std::size_t j = 0; j < layer.w.cols(); ++j) grad.w(i, j) += g[i] * in[j];
    }
    std::vector<double> d_in(layer.w.cols(), 0.0);
    for (std::size_t i = 0; i < layer.w.rows(); ++i)
        for (std::size_t j = 0; j < layer.w.cols(); ++j) d_in[j] += layer.w(i, j) * g[i];
    return d_in;
}

}  // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + name + "' (expected relu or tanh)");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

void ModelConfig::validate() const {
    std::ostringstream bad;
    if (n == 0) bad << " n";
    if (p == 0) bad << " p";
    if (q == 0) bad << " q";
    if (k == 0) bad << " k";
    if (hidden_width == 0) bad << " hidden_width";
    if (hidden_depth == 0) bad << " hidden_depth";
    if (head_width == 0) bad << " head_width";
    if (!bad.str().empty()) {
        throw std::invalid_argument("model config fields must be positive:" + bad.str());
    }
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    ModelParams params;
    std::size_t in_dim = cfg.n * cfg.p;
    for (std::size_t d = 0; d < cfg.hidden_depth; ++d) {
        params.trunk.push_back(init_layer(cfg.hidden_width, in_dim, rng));
        in_dim = cfg.hidden_width;
    }
    params.mean_head.push_back(init_layer(cfg.head_width, cfg.hidden_width, rng));
    params.mean_head.push_back(init_layer(cfg.n * cfg.q, cfg.head_width, rng));
    params.weight_head.push_back(init_layer(cfg.head_width, cfg.hidden_width, rng));
    params.weight_head.push_back(init_layer(cfg.k, cfg.head_width, rng));
    const double head_gain = std::getenv("DYNMIX_WHEAD_GAIN")
                                 ? std::atof(std::getenv("DYNMIX_WHEAD_GAIN"))
                                 : 1.0;
    for (double& v : params.weight_head.back().w.data()) v *= head_gain;
    return params;
}

ForecastOutput forward(const ModelConfig& cfg, const ModelParams& params, const Matrix& x,
                       ForwardTrace* trace) {
    require_shape(x, cfg.n, cfg.p, "model input");

    std::vector<double> h(x.data().begin(), x.data().end());
    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    t = ForwardTrace{};
    t.input = h;

    for (const DenseLayer& layer : params.trunk) {
        std::vector<double> pre = affine(layer, h);
        h = apply_act(cfg.activation, pre);
        t.trunk_pre.push_back(std::move(pre));
        t.trunk_post.push_back(h);
    }

    std::vector<double> mean_pre = affine(params.mean_head[0], h);
    std::vector<double> mean_hidden = apply_act(cfg.activation, mean_pre);
    std::vector<double> mean_out = affine(params.mean_head[1], mean_hidden);
    t.mean_pre.push_back(std::move(mean_pre));
    t.mean_post.push_back(mean_hidden);

    std::vector<double> w_pre = affine(params.weight_head[0], h);
    std::vector<double> w_hidden = apply_act(cfg.activation, w_pre);
    std::vector<double> logits = affine(params.weight_head[1], w_hidden);
    t.weight_pre.push_back(std::move(w_pre));
    t.weight_post.push_back(std::move(w_hidden));

    ForecastOutput out;
    out.mean = Matrix(cfg.n, cfg.q);
    for (std::size_t i = 0; i < cfg.n; ++i)
        for (std::size_t j = 0; j < cfg.q; ++j) out.mean(i, j) = mean_out[i * cfg.q + j];
    out.weights = softmax(logits);
    out.logits = std::move(logits);
    return out;
}

ModelParams zero_like(const ModelParams& params) {
    ModelParams z;
    auto zero_layers = [](const std::vector<DenseLayer>& src) {
        std::vector<DenseLayer> out;
        out.reserve(src.size());
        for (const DenseLayer& layer : src) {
            out.push_back({Matrix(layer.w.rows(), layer.w.cols()),
                           std::vector<double>(layer.b.size(), 0.0)});
        }
        return out;
    };
    z.trunk = zero_layers(params.trunk);
    z.mean_head = zero_layers(params.mean_head);
    z.weight_head = zero_layers(params.weight_head);
    return z;
}

void backward(const ModelConfig& cfg, const ModelParams& params, const ForwardTrace& trace,
              const Matrix& d_mean, std::span<const double> d_logits, ModelParams& grads) {
    require_shape(d_mean, cfg.n, cfg.q, "upstream mean gradient");
    if (d_logits.size() != cfg.k) {
        throw std::invalid_argument("upstream logit gradient size does not match K");
    }

    const std::vector<double>& trunk_out =
        trace.trunk_post.empty() ? trace.input : trace.trunk_post.back();

    // Mean head.
    std::vector<double> g(d_mean.data().begin(), d_mean.data().end());
    std::vector<double> d_hidden =
        affine_backward(params.mean_head[1], trace.mean_post[0], g, grads.mean_head[1]);
    for (std::size_t i = 0; i < d_hidden.size(); ++i)
        d_hidden[i] *= act_prime(cfg.activation, trace.mean_pre[0][i]);
    std::vector<double> d_trunk_out =
        affine_backward(params.mean_head[0], trunk_out, d_hidden, grads.mean_head[0]);

    // Weight head.
    std::vector<double> gw(d_logits.begin(), d_logits.end());
    std::vector<double> d_whidden =
        affine_backward(params.weight_head[1], trace.weight_post[0], gw, grads.weight_head[1]);
    for (std::size_t i = 0; i < d_whidden.size(); ++i)
        d_whidden[i] *= act_prime(cfg.activation, trace.weight_pre[0][i]);
    std::vector<double> d_trunk_w =
        affine_backward(params.weight_head[0], trunk_out, d_whidden, grads.weight_head[0]);
    for (std::size_t i = 0; i < d_trunk_out.size(); ++i) d_trunk_out[i] += d_trunk_w[i];

    // Trunk, last layer to first.
    std::vector<double> d_h = std::move(d_trunk_out);
    for (std::size_t li = params.trunk.size(); li-- > 0;) {
        for (std::size_t i = 0; i < d_h.size(); ++i)
            d_h[i] *= act_prime(cfg.activation, trace.trunk_pre[li][i]);
        const std::vector<double>& in = li == 0 ? trace.input : trace.trunk_post[li - 1];
        d_h = affine_backward(params.trunk[li], in, d_h, grads.trunk[li]);
    }
}

}  // namespace dynmix
