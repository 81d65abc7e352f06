#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynmix/model.hpp"
#include "dynmix/trainer.hpp"
#include "oracles.hpp"

using dynmix::Activation;
using dynmix::ForecastOutput;
using dynmix::Matrix;
using dynmix::ModelConfig;
using dynmix::ModelParams;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.n = 3;
    cfg.p = 4;
    cfg.q = 2;
    cfg.k = 2;
    cfg.hidden_width = 8;
    cfg.hidden_depth = 1;
    cfg.head_width = 8;
    cfg.activation = Activation::tanh;
    return cfg;
}

void zero_params(ModelParams& params) {
    for (auto* layers : {&params.trunk, &params.mean_head, &params.weight_head}) {
        for (dynmix::DenseLayer& layer : *layers) {
            for (double& v : layer.w.data()) v = 0.0;
            for (double& v : layer.b) v = 0.0;
        }
    }
}

}  // namespace

TEST_CASE("zero parameters give zero mean and uniform weights") {
    const ModelConfig cfg = tiny_config();
    dynmix::Rng rng(1);
    ModelParams params = dynmix::init_params(cfg, rng);
    zero_params(params);
    const ForecastOutput out = dynmix::forward(cfg, params, Matrix(3, 4));
    for (double v : out.mean.data()) CHECK(v == 0.0);
    for (double w : out.weights) CHECK(w == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("single-component weight head always outputs one") {
    ModelConfig cfg = tiny_config();
    cfg.k = 1;
    dynmix::Rng rng(2);
    const ModelParams params = dynmix::init_params(cfg, rng);
    const ForecastOutput out = dynmix::forward(cfg, params, oracles::random_matrix(3, 4, rng));
    REQUIRE(out.weights.size() == 1);
    CHECK(out.weights[0] == 1.0);
}

TEST_CASE("forward is deterministic") {
    const ModelConfig cfg = tiny_config();
    dynmix::Rng rng(3);
    const ModelParams params = dynmix::init_params(cfg, rng);
    const Matrix x = oracles::random_matrix(3, 4, rng);
    const ForecastOutput a = dynmix::forward(cfg, params, x);
    const ForecastOutput b = dynmix::forward(cfg, params, x);
    for (std::size_t i = 0; i < a.mean.size(); ++i)
        CHECK(a.mean.data()[i] == b.mean.data()[i]);
    for (std::size_t k = 0; k < a.weights.size(); ++k) CHECK(a.weights[k] == b.weights[k]);
}

TEST_CASE("weights sum to one across random inputs") {
    ModelConfig cfg = tiny_config();
    cfg.k = 5;
    dynmix::Rng rng(5);
    const ModelParams params = dynmix::init_params(cfg, rng);
    for (int rep = 0; rep < 50; ++rep) {
        const ForecastOutput out =
            dynmix::forward(cfg, params, oracles::random_matrix(3, 4, rng));
        double total = 0.0;
        for (double w : out.weights) {
            CHECK(w >= 0.0);
            total += w;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("permuting final weight-head rows permutes the weights") {
    ModelConfig cfg = tiny_config();
    cfg.k = 3;
    dynmix::Rng rng(7);
    const ModelParams params = dynmix::init_params(cfg, rng);
    const Matrix x = oracles::random_matrix(3, 4, rng);
    const ForecastOutput base = dynmix::forward(cfg, params, x);

    const std::vector<std::size_t> perm = {2, 0, 1};
    ModelParams permuted = params;
    dynmix::DenseLayer& last = permuted.weight_head.back();
    for (std::size_t i = 0; i < 3; ++i) {
        last.b[i] = params.weight_head.back().b[perm[i]];
        for (std::size_t j = 0; j < last.w.cols(); ++j)
            last.w(i, j) = params.weight_head.back().w(perm[i], j);
    }
    const ForecastOutput got = dynmix::forward(cfg, permuted, x);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(got.weights[i] == doctest::Approx(base.weights[perm[i]]).epsilon(1e-14));
}

TEST_CASE("zero upstream gradients give zero parameter gradients") {
    const ModelConfig cfg = tiny_config();
    dynmix::Rng rng(11);
    const ModelParams params = dynmix::init_params(cfg, rng);
    dynmix::ForwardTrace trace;
    (void)dynmix::forward(cfg, params, oracles::random_matrix(3, 4, rng), &trace);
    ModelParams grads = dynmix::zero_like(params);
    dynmix::backward(cfg, params, trace, Matrix(3, 2), std::vector<double>(2, 0.0), grads);
    for (const auto* layers : {&grads.trunk, &grads.mean_head, &grads.weight_head})
        for (const dynmix::DenseLayer& layer : *layers) {
            for (double v : layer.w.data()) CHECK(v == 0.0);
            for (double v : layer.b) CHECK(v == 0.0);
        }
}

TEST_CASE("backward matches finite differences on the tiny config") {
    const ModelConfig cfg = tiny_config();
    dynmix::Rng rng(13);
    ModelParams params = dynmix::init_params(cfg, rng);
    const Matrix x = oracles::random_matrix(3, 4, rng);

    // Scalar objective: weighted sums of the outputs, so upstream gradients
    // are the weight tensors themselves.
    const Matrix mean_w = oracles::random_matrix(3, 2, rng);
    std::vector<double> logit_w = {0.7, -0.4};
    const auto objective = [&]() {
        const ForecastOutput out = dynmix::forward(cfg, params, x);
        double acc = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j) acc += mean_w(i, j) * out.mean(i, j);
        for (std::size_t k = 0; k < 2; ++k) acc += logit_w[k] * out.logits[k];
        return acc;
    };

    dynmix::ForwardTrace trace;
    (void)dynmix::forward(cfg, params, x, &trace);
    ModelParams grads = dynmix::zero_like(params);
    dynmix::backward(cfg, params, trace, mean_w, logit_w, grads);

    dynmix::MixtureBank dummy = dynmix::init_bank(3, 2, 1);
    ModelParams grads_copy = grads;  // param_refs order matches across both
    dynmix::MixtureBank dummy2 = dynmix::init_bank(3, 2, 1);
    const std::vector<double*> p_refs = dynmix::param_refs(params, dummy);
    const std::vector<double*> g_refs = dynmix::param_refs(grads_copy, dummy2);
    const std::vector<dynmix::ParamClass> classes = dynmix::param_classes(params, dummy);

    for (std::size_t i = 0; i < p_refs.size(); ++i) {
        if (classes[i] != dynmix::ParamClass::network) continue;
        const double fd = oracles::finite_difference(objective, p_refs[i], 1e-5);
        CHECK(std::abs(*g_refs[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("dead relu zeroes gradients below the first layer") {
    ModelConfig cfg = tiny_config();
    cfg.activation = Activation::relu;
    cfg.hidden_depth = 2;
    dynmix::Rng rng(17);
    ModelParams params = dynmix::init_params(cfg, rng);
    // Strongly negative first-layer weights and negative trunk biases with a
    // positive input: every trunk pre-activation is negative, so each trunk
    // layer outputs exactly zero.
    for (double& v : params.trunk[0].w.data()) v = -std::abs(v) - 0.1;
    for (dynmix::DenseLayer& layer : params.trunk)
        for (double& v : layer.b) v = -0.1;
    Matrix x(3, 4, 1.0);

    dynmix::ForwardTrace trace;
    (void)dynmix::forward(cfg, params, x, &trace);
    ModelParams grads = dynmix::zero_like(params);
    const Matrix d_mean = oracles::random_matrix(3, 2, rng);
    dynmix::backward(cfg, params, trace, d_mean, std::vector<double>{0.3, -0.3}, grads);

    for (double v : grads.trunk[1].w.data()) CHECK(v == 0.0);
    for (double v : grads.mean_head[0].w.data()) CHECK(v == 0.0);
    for (double v : grads.weight_head[0].w.data()) CHECK(v == 0.0);
}

TEST_CASE("forward rejects mismatched input shapes") {
    const ModelConfig cfg = tiny_config();
    dynmix::Rng rng(19);
    const ModelParams params = dynmix::init_params(cfg, rng);
    CHECK_THROWS_AS((void)dynmix::forward(cfg, params, Matrix(4, 3)), std::invalid_argument);
}
