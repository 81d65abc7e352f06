#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynmix/evaluation.hpp"
#include "dynmix/trainer.hpp"
#include "oracles.hpp"

using dynmix::Matrix;
using dynmix::MetricsReport;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// A dataset of zero-input windows whose targets are exactly the given
// residuals, so residual = y - model_mean when the model outputs zero.
dynmix::WindowedDataset residual_dataset(const std::vector<Matrix>& residuals, std::size_t p) {
    dynmix::WindowedDataset ds;
    ds.n = residuals.front().rows();
    ds.q = residuals.front().cols();
    ds.p = p;
    for (const Matrix& r : residuals) {
        dynmix::Window win;
        win.x = Matrix(ds.n, p);
        win.y = r;
        ds.windows.push_back(std::move(win));
    }
    return ds;
}

dynmix::ModelParams zeroed_model(const dynmix::ModelConfig& cfg) {
    dynmix::Rng rng(0);
    dynmix::ModelParams params = dynmix::init_params(cfg, rng);
    for (auto* layers : {&params.trunk, &params.mean_head, &params.weight_head})
        for (dynmix::DenseLayer& layer : *layers) {
            for (double& v : layer.w.data()) v = 0.0;
            for (double& v : layer.b) v = 0.0;
        }
    return params;
}

}  // namespace

TEST_CASE("perfect forecast has zero metrics") {
    dynmix::Rng rng(1);
    std::vector<Matrix> truth = {oracles::random_matrix(2, 3, rng),
                                 oracles::random_matrix(2, 3, rng)};
    const MetricsReport report = dynmix::metrics(truth, truth, {1, 2, 3});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(report.rmse[i] == 0.0);
        CHECK(report.mae[i] == 0.0);
        CHECK(report.mape[i] == 0.0);
    }
}

TEST_CASE("single cell hand computation") {
    Matrix truth(1, 1), pred(1, 1);
    truth(0, 0) = 50.0;
    pred(0, 0) = 45.0;
    const MetricsReport report = dynmix::metrics({pred}, {truth}, {1});
    CHECK(report.mae[0] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(report.rmse[0] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(report.mape[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("two cell hand computation") {
    Matrix truth(2, 1), pred(2, 1);
    truth(0, 0) = 10.0;
    truth(1, 0) = 10.0;
    pred(0, 0) = 13.0;
    pred(1, 0) = 14.0;
    const MetricsReport report = dynmix::metrics({pred}, {truth}, {1});
    CHECK(report.rmse[0] == doctest::Approx(std::sqrt(12.5)).epsilon(1e-14));
    CHECK(report.mae[0] == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("rmse dominates mae on random reports") {
    dynmix::Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<Matrix> truth, pred;
        for (int w = 0; w < 4; ++w) {
            truth.push_back(oracles::random_matrix(3, 4, rng));
            pred.push_back(oracles::random_matrix(3, 4, rng));
        }
        const MetricsReport report = dynmix::metrics(pred, truth, {1, 2, 3, 4});
        for (std::size_t i = 0; i < report.horizons.size(); ++i)
            CHECK(report.rmse[i] >= report.mae[i] - 1e-14);
    }
}

TEST_CASE("mape masks near-zero truth and reports the count") {
    Matrix truth(2, 1), pred(2, 1);
    truth(0, 0) = 0.0;
    truth(1, 0) = 100.0;
    pred(0, 0) = 5.0;
    pred(1, 0) = 90.0;
    const MetricsReport report = dynmix::metrics({pred}, {truth}, {1});
    CHECK(report.mape[0] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(report.mape_excluded == 1);
}

TEST_CASE("metrics reject empty input and bad horizons") {
    CHECK_THROWS_AS((void)dynmix::metrics({}, {}, {1}), std::invalid_argument);
    Matrix a(1, 2);
    CHECK_THROWS_AS((void)dynmix::metrics({a}, {a}, {3}), std::invalid_argument);
}

TEST_CASE("metrics are invariant under normalize-then-denormalize") {
    dynmix::Rng rng(5);
    dynmix::NormStats norm;
    norm.mean = {57.3};
    norm.std = {6.1};
    std::vector<Matrix> truth, pred, pred_rt;
    for (int w = 0; w < 5; ++w) {
        truth.push_back(oracles::random_matrix(2, 3, rng) * 5.0 + Matrix(2, 3, 60.0));
        pred.push_back(oracles::random_matrix(2, 3, rng) * 5.0 + Matrix(2, 3, 60.0));
        Matrix rt = pred.back();
        for (double& v : rt.data()) v = norm.denormalize(norm.normalize(v, 0), 0);
        pred_rt.push_back(std::move(rt));
    }
    const MetricsReport a = dynmix::metrics(pred, truth, {1, 3});
    const MetricsReport b = dynmix::metrics(pred_rt, truth, {1, 3});
    for (std::size_t i = 0; i < a.horizons.size(); ++i) {
        CHECK(std::abs(a.rmse[i] - b.rmse[i]) < 1e-10);
        CHECK(std::abs(a.mae[i] - b.mae[i]) < 1e-10);
        CHECK(std::abs(a.mape[i] - b.mape[i]) < 1e-10);
    }
}

TEST_CASE("eval_nll of the isotropic setup is the 2pi constant") {
    dynmix::ModelConfig cfg;
    cfg.n = 2;
    cfg.p = 3;
    cfg.q = 2;
    cfg.k = 2;
    cfg.hidden_width = 4;
    cfg.hidden_depth = 1;
    cfg.head_width = 4;
    const dynmix::ModelParams params = zeroed_model(cfg);
    const dynmix::MixtureBank bank = dynmix::init_bank(2, 2, 2);
    // Zero model on zero targets: residuals are zero, weights uniform.
    const dynmix::WindowedDataset ds = residual_dataset({Matrix(2, 2), Matrix(2, 2)}, 3);
    CHECK(dynmix::eval_nll(cfg, params, bank, ds) ==
          doctest::Approx(2.0 * kLog2Pi).epsilon(1e-14));
}

TEST_CASE("K=1 eval_nll equals the mean matrix-normal NLL") {
    dynmix::ModelConfig cfg;
    cfg.n = 2;
    cfg.p = 3;
    cfg.q = 2;
    cfg.k = 1;
    cfg.hidden_width = 4;
    cfg.hidden_depth = 1;
    cfg.head_width = 4;
    const dynmix::ModelParams params = zeroed_model(cfg);

    dynmix::Rng rng(7);
    dynmix::MixtureBank bank;
    bank.components.push_back(
        dynmix::MatnormComponent{oracles::random_factor(2, rng), oracles::random_factor(2, rng)});

    std::vector<Matrix> residuals;
    double want = 0.0;
    for (int w = 0; w < 6; ++w) {
        residuals.push_back(oracles::random_matrix(2, 2, rng));
        want -= dynmix::log_density(bank.components[0], residuals.back());
    }
    want /= 6.0;
    const dynmix::WindowedDataset ds = residual_dataset(residuals, 3);
    CHECK(dynmix::eval_nll(cfg, params, bank, ds) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("eval_nll matches the dense mixture oracle on a small checkpoint") {
    dynmix::ModelConfig cfg;
    cfg.n = 2;
    cfg.p = 3;
    cfg.q = 2;
    cfg.k = 2;
    cfg.hidden_width = 4;
    cfg.hidden_depth = 1;
    cfg.head_width = 4;
    const dynmix::ModelParams params = zeroed_model(cfg);  // uniform weights, zero mean

    dynmix::Rng rng(11);
    dynmix::MixtureBank bank;
    for (int k = 0; k < 2; ++k)
        bank.components.push_back(dynmix::MatnormComponent{oracles::random_factor(2, rng),
                                                           oracles::random_factor(2, rng)});

    std::vector<Matrix> residuals;
    double want = 0.0;
    for (int w = 0; w < 10; ++w) {
        residuals.push_back(oracles::random_matrix(2, 2, rng));
        want += oracles::dense_mixture_nll(bank, {0.5, 0.5}, residuals.back());
    }
    want /= 10.0;
    const dynmix::WindowedDataset ds = residual_dataset(residuals, 3);
    const double got = dynmix::eval_nll(cfg, params, bank, ds);
    CHECK(std::abs(got - want) / std::abs(want) < 1e-8);
}

TEST_CASE("weight trajectory bookkeeping") {
    dynmix::ModelConfig cfg;
    cfg.n = 2;
    cfg.p = 3;
    cfg.q = 2;
    cfg.k = 1;
    cfg.hidden_width = 4;
    cfg.hidden_depth = 1;
    cfg.head_width = 4;
    dynmix::Rng rng(13);
    const dynmix::ModelParams params = dynmix::init_params(cfg, rng);

    dynmix::WindowedDataset ds = residual_dataset({Matrix(2, 2), Matrix(2, 2), Matrix(2, 2)}, 3);
    ds.windows[0].time_of_day_minutes = 10;
    ds.windows[1].time_of_day_minutes = 20;
    ds.windows[2].time_of_day_minutes = 30;
    const std::vector<dynmix::WeightRecord> records = dynmix::weight_trajectory(cfg, params, ds);
    REQUIRE(records.size() == 3);
    CHECK(records[1].time_of_day_minutes == 20);
    for (const dynmix::WeightRecord& r : records) {
        REQUIRE(r.weights.size() == 1);
        CHECK(r.weights[0] == 1.0);
    }
}

TEST_CASE("default horizons clip to the forecast length") {
    CHECK(dynmix::default_horizons(12) == std::vector<std::size_t>{3, 6, 9, 12});
    CHECK(dynmix::default_horizons(6) == std::vector<std::size_t>{3, 6});
    CHECK(dynmix::default_horizons(2) == std::vector<std::size_t>{1, 2});
}
