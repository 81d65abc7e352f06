#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynmix/matnorm.hpp"
#include "oracles.hpp"

using dynmix::CholFactor;
using dynmix::MatnormComponent;
using dynmix::Matrix;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace

TEST_CASE("standard normal at zero") {
    const MatnormComponent comp = MatnormComponent::identity(1, 1);
    const Matrix r(1, 1);
    CHECK(dynmix::log_density(comp, r) == doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-14));
    CHECK(dynmix::log_density(comp, r) == doctest::Approx(-0.9189385).epsilon(1e-6));
}

TEST_CASE("identity factors at zero residual reduce to the 2pi term") {
    const MatnormComponent comp = MatnormComponent::identity(2, 3);
    const Matrix r(2, 3);
    CHECK(dynmix::log_density(comp, r) == doctest::Approx(-3.0 * kLog2Pi).epsilon(1e-14));
}

TEST_CASE("log density matches the dense vec-covariance oracle") {
    dynmix::Rng rng(101);
    const CholFactor ln = oracles::random_factor(3, rng);
    const CholFactor lq = oracles::random_factor(2, rng);
    const MatnormComponent comp{ln, lq};
    const Matrix r = oracles::random_matrix(3, 2, rng);
    CHECK(rel_err(dynmix::log_density(comp, r), oracles::dense_matnorm_logpdf(comp, r)) < 1e-8);
}

TEST_CASE("log density matches dense oracle over all small shapes") {
    dynmix::Rng rng(103);
    for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t q = 1; q <= 4; ++q)
            for (int rep = 0; rep < 4; ++rep) {
                const MatnormComponent comp{oracles::random_factor(n, rng),
                                            oracles::random_factor(q, rng)};
                const Matrix r = oracles::random_matrix(n, q, rng);
                CHECK(rel_err(dynmix::log_density(comp, r),
                              oracles::dense_matnorm_logpdf(comp, r)) < 1e-8);
            }
}

TEST_CASE("log density is invariant under Kronecker rescaling") {
    dynmix::Rng rng(107);
    const Matrix r = oracles::random_matrix(3, 4, rng);
    const MatnormComponent comp{oracles::random_factor(3, rng), oracles::random_factor(4, rng)};
    const double base = dynmix::log_density(comp, r);
    for (double nu : {0.1, 7.3}) {
        MatnormComponent scaled = comp;
        const double root = std::sqrt(nu);
        for (double& v : scaled.spatial.strict_lower()) v /= root;
        for (double& v : scaled.spatial.log_diags()) v -= 0.5 * std::log(nu);
        for (double& v : scaled.temporal.strict_lower()) v *= root;
        for (double& v : scaled.temporal.log_diags()) v += 0.5 * std::log(nu);
        CHECK(rel_err(dynmix::log_density(scaled, r), base) < 1e-10);
    }
}

TEST_CASE("scalar density integrates to one") {
    dynmix::Rng rng(109);
    CholFactor f(1);
    f.log_diag(0) = 0.35;  // precision != 1 to make the quadrature non-trivial
    const MatnormComponent comp{f, CholFactor(1)};
    // Simpson's rule over [-8, 8].
    const int steps = 4000;
    const double h = 16.0 / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        Matrix r(1, 1);
        r(0, 0) = -8.0 + i * h;
        const double f_val = std::exp(dynmix::log_density(comp, r));
        acc += f_val * (i == 0 || i == steps ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
    }
    acc *= h / 3.0;
    CHECK(std::abs(acc - 1.0) < 1e-6);
}

TEST_CASE("log density rejects wrong residual shape") {
    const MatnormComponent comp = MatnormComponent::identity(2, 3);
    CHECK_THROWS_AS((void)dynmix::log_density(comp, Matrix(3, 2)), std::invalid_argument);
}

TEST_CASE("sampling with identity factors gives unit variance") {
    const MatnormComponent comp = MatnormComponent::identity(2, 2);
    dynmix::Rng rng(211);
    const int draws = 200000;
    Matrix sum(2, 2), sum_sq(2, 2);
    for (int d = 0; d < draws; ++d) {
        const Matrix s = dynmix::sample(comp, rng);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                sum(i, j) += s(i, j);
                sum_sq(i, j) += s(i, j) * s(i, j);
            }
    }
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double mean = sum(i, j) / draws;
            const double var = sum_sq(i, j) / draws - mean * mean;
            CHECK(var > 0.97);
            CHECK(var < 1.03);
        }
}

TEST_CASE("empirical vec covariance matches the Kronecker oracle") {
    const CholFactor ln(2, {0.4}, {0.1, -0.2});
    const CholFactor lq(2, {-0.3}, {-0.1, 0.25});
    const MatnormComponent comp{ln, lq};
    dynmix::Rng rng(223);

    const int draws = 200000;
    Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
    for (int d = 0; d < draws; ++d) {
        const Eigen::VectorXd v = oracles::vec(dynmix::sample(comp, rng));
        acc += v * v.transpose();
    }
    acc /= draws;

    const Eigen::MatrixXd want = oracles::eigen_kron(oracles::dense_covariance(comp.temporal),
                                                     oracles::dense_covariance(comp.spatial));
    const double err = (acc - want).norm() / want.norm();
    CHECK(err < 0.05);
}

TEST_CASE("sampling is deterministic given the seed") {
    const MatnormComponent comp{CholFactor(3, {0.1, -0.2, 0.3}, {0.0, 0.1, -0.1}),
                                CholFactor(2, {0.2}, {0.05, 0.0})};
    dynmix::Rng a(31), b(31);
    for (int rep = 0; rep < 3; ++rep) {
        const Matrix sa = dynmix::sample(comp, a);
        const Matrix sb = dynmix::sample(comp, b);
        for (std::size_t i = 0; i < sa.rows(); ++i)
            for (std::size_t j = 0; j < sa.cols(); ++j) CHECK(sa(i, j) == sb(i, j));
    }
}
