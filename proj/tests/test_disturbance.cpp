/*
 Copyright 2026 The drpac Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "drpac/disturbance.hpp"
#include "drpac/random.hpp"
#include "test_fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace drpac;

namespace {

struct DoubleIntegratorSetup {
    LtiPlant plant = testing::double_integrator();
    CostWeights weights = testing::default_weights();
    SlsBasis basis = causal_basis(plant, build_constraints(plant));
    WeightedMapBasis map = build_weighted_basis(basis, weights);
    DisturbanceModel model = DisturbanceModel::isotropic_gaussian(22, 0.02);
};

const DoubleIntegratorSetup& fixture() {
    static const DoubleIntegratorSetup setup;
    return setup;
}

GaussianPosterior point_mass(Eigen::VectorXd mean) {
    GaussianPosterior q;
    q.mean = std::move(mean);
    q.log_sigma = std::log(1e-300);
    return q;
}

Eigen::VectorXd random_unit(Eigen::Index dim, std::mt19937_64& rng) {
    const Eigen::VectorXd v = standard_normal(dim, 1, rng);
    return v / v.norm();
}

}  // namespace

TEST_CASE("Gaussian sampling") {
    Eigen::VectorXd mean(3);
    mean << 0.5, -1.0, 2.0;

    SUBCASE("zero covariance returns the mean") {
        const auto model = DisturbanceModel::gaussian(mean, Eigen::MatrixXd::Zero(3, 3));
        const Eigen::MatrixXd W = sample_disturbances(model, 50, 1);
        for (Eigen::Index i = 0; i < W.cols(); ++i) CHECK(W.col(i) == mean);
    }
    SUBCASE("sample mean and covariance agree with the model") {
        Eigen::MatrixXd cov(3, 3);
        cov << 1.0, 0.3, 0.0, 0.3, 0.5, 0.1, 0.0, 0.1, 0.2;
        const auto model = DisturbanceModel::gaussian(mean, cov);
        const int count = 100000;
        const Eigen::MatrixXd W = sample_disturbances(model, count, 2);
        const Eigen::VectorXd m = W.rowwise().mean();
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(m(i) - mean(i)) <= 4.0 * std::sqrt(cov(i, i) / count));
        }
        const Eigen::MatrixXd centered = W.colwise() - m;
        const Eigen::MatrixXd sample_cov = centered * centered.transpose() / (count - 1.0);
        CHECK((sample_cov - cov).cwiseAbs().maxCoeff() <= 0.02);
    }
    SUBCASE("same seed and stream reproduce, different ones do not") {
        const auto model = DisturbanceModel::isotropic_gaussian(4, 1.0);
        CHECK(sample_disturbances(model, 10, 3, 1) == sample_disturbances(model, 10, 3, 1));
        CHECK(sample_disturbances(model, 10, 3, 1) != sample_disturbances(model, 10, 3, 2));
        CHECK(sample_disturbances(model, 10, 3, 1) != sample_disturbances(model, 10, 4, 1));
    }
    CHECK_THROWS_AS(sample_disturbances(DisturbanceModel::isotropic_gaussian(2, 1.0), 0, 1), std::invalid_argument);
}

TEST_CASE("bounded sampling stays inside the ball") {
    const auto model = DisturbanceModel::bounded(5, 0.3);
    const Eigen::MatrixXd W = sample_disturbances(model, 20000, 5);
    const Eigen::VectorXd norms = W.colwise().norm().transpose();
    CHECK(norms.maxCoeff() <= 0.3 + 1e-15);
    // Uniform in the ball: P(||w|| <= R/2) = 2^{-5}.
    const double inner = static_cast<double>((norms.array() <= 0.15).count()) / W.cols();
    CHECK(std::abs(inner - 1.0 / 32.0) <= 4.0 * std::sqrt((1.0 / 32.0) * (31.0 / 32.0) / W.cols()));
    CHECK(W.rowwise().mean().cwiseAbs().maxCoeff() <= 0.01);
}

TEST_CASE("training samples") {
    const auto& s = fixture();
    const TrainingSample a = sample_training(s.model, 16, 7);
    CHECK(a.size() == 16);
    CHECK(a.trajectories().rows() == 22);
    CHECK(a.trajectories() == sample_training(s.model, 16, 7).trajectories());
    CHECK_THROWS_AS(sample_training(s.model, 1, 7), std::invalid_argument);
}

TEST_CASE("shifted model") {
    const auto& s = fixture();
    const Eigen::VectorXd theta = Eigen::VectorXd::Zero(110);

    SUBCASE("zero radius leaves the model unchanged") {
        const DisturbanceModel shifted = shifted_model(s.model, ShiftSpec{0.0, {}}, s.map, theta);
        CHECK(shifted.mean() == s.model.mean());
        CHECK(shifted.cov() == s.model.cov());
    }
    SUBCASE("explicit direction translates the mean") {
        const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(22, 0);
        const DisturbanceModel shifted = shifted_model(s.model, ShiftSpec{0.08, e1}, s.map, theta);
        CHECK(shifted.mean() == 0.08 * e1);
        CHECK(shifted.cov() == s.model.cov());

        // Common random numbers realize the translation coupling exactly.
        const Eigen::MatrixXd a = sample_disturbances(s.model, 2000, 8);
        const Eigen::MatrixXd b = sample_disturbances(shifted, 2000, 8);
        CHECK(std::abs(coupled_w1(a, b) - 0.08) <= 1e-12);
    }
    SUBCASE("adversarial direction is the top right singular vector") {
        const DisturbanceModel shifted = shifted_model(s.model, ShiftSpec{0.08, {}}, s.map, theta);
        const SingularTriplet top = operator_norm(s.map.evaluate(theta));
        const Eigen::VectorXd d = (shifted.mean() - s.model.mean()) / 0.08;
        CHECK(std::abs(d.norm() - 1.0) <= 1e-12);
        CHECK(std::abs(std::abs(d.dot(top.v)) - 1.0) <= 1e-12);
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(shifted_model(DisturbanceModel::bounded(22, 0.1), ShiftSpec{0.08, {}}, s.map, theta),
                        std::invalid_argument);
        CHECK_THROWS_AS(shifted_model(s.model, ShiftSpec{0.08, Eigen::VectorXd::Ones(22)}, s.map, theta),
                        std::invalid_argument);
        CHECK_THROWS_AS(shifted_model(s.model, ShiftSpec{0.08, Eigen::VectorXd::Unit(3, 0)}, s.map, theta),
                        std::invalid_argument);
        CHECK_THROWS_AS(shifted_model(s.model, ShiftSpec{-0.1, {}}, s.map, theta), std::invalid_argument);
    }
}

TEST_CASE("adversarial direction sign convention") {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
    M(0, 0) = 3.0;
    M(1, 1) = 1.0;
    Eigen::VectorXd mean(2);
    mean << -1.0, 0.0;
    const Eigen::VectorXd d = adversarial_direction(M, mean);
    CHECK(d(0) == doctest::Approx(-1.0));
    CHECK(adversarial_direction(M, Eigen::VectorXd::Zero(2))(0) == doctest::Approx(1.0));
}

TEST_CASE("test risk") {
    const auto& s = fixture();

    SUBCASE("zero disturbances give zero risk") {
        const auto zero = DisturbanceModel::gaussian(Eigen::VectorXd::Zero(22), Eigen::MatrixXd::Zero(22, 22));
        const TestReport r = test_risk(s.map, point_mass(Eigen::VectorXd::Zero(110)), zero, 100, 3, 1);
        CHECK(r.mean_risk == 0.0);
        CHECK(r.standard_error == 0.0);
    }
    SUBCASE("identity map with a point posterior is the mean norm") {
        const WeightedMapBasis identity(Eigen::MatrixXd::Identity(4, 4), {Eigen::MatrixXd::Zero(4, 4)});
        const auto model = DisturbanceModel::isotropic_gaussian(4, 1.0);
        const TestReport r = test_risk(identity, point_mass(Eigen::VectorXd::Zero(1)), model, 500, 1, 9);
        const Eigen::MatrixXd draws = sample_disturbances(model, 500, 9, 1);
        CHECK(r.mean_risk == doctest::Approx(draws.colwise().norm().mean()).epsilon(1e-14));
        CHECK(r.standard_error > 0.0);
    }
    SUBCASE("per-posterior risks are reproducible") {
        GaussianPosterior q = point_mass(Eigen::VectorXd::Zero(110));
        q.log_sigma = std::log(0.05);
        const TestReport a = test_risk(s.map, q, s.model, 200, 4, 11);
        const TestReport b = test_risk(s.map, q, s.model, 200, 4, 11);
        CHECK(a.per_posterior_risk == b.per_posterior_risk);
        CHECK(a.per_posterior_risk.size() == 4);
    }
    SUBCASE("adversarial shift is at least as costly as no shift") {
        const Eigen::VectorXd theta = Eigen::VectorXd::Zero(110);
        const DisturbanceModel shifted = shifted_model(s.model, ShiftSpec{0.08, {}}, s.map, theta);
        const TestReport nominal = test_risk(s.map, point_mass(theta), s.model, 2000, 2, 12);
        const TestReport moved = test_risk(s.map, point_mass(theta), shifted, 2000, 2, 12);
        CHECK(moved.mean_risk >= nominal.mean_risk);
        // Lipschitz transport: the gap never exceeds L * radius.
        CHECK(moved.mean_risk - nominal.mean_risk <= 0.08 * lipschitz_certificate(s.map, theta) + 1e-12);
    }
}

TEST_CASE("Kantorovich-Rubinstein bound under translations") {
    const auto& s = fixture();
    auto rng = make_rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd theta = 0.2 * standard_normal(110, 1, rng);
        const Eigen::MatrixXd M = s.map.evaluate(theta);
        const double L = lipschitz_certificate(s.map, theta);
        const Eigen::VectorXd dir = random_unit(22, rng);
        const double radius = 0.01 * (trial + 1);
        const Eigen::MatrixXd a = sample_disturbances(s.model, 1000, 14 + trial);
        const Eigen::MatrixXd b = a.colwise() + radius * dir;
        const double gap = std::abs(conditional_risk(M, b).mean - conditional_risk(M, a).mean);
        CHECK(gap <= L * coupled_w1(a, b) + 1e-12);
    }
}

TEST_CASE("adversarial direction dominates random directions") {
    const auto& s = fixture();
    auto rng = make_rng(15);
    const Eigen::VectorXd theta = 0.1 * standard_normal(110, 1, rng);
    const Eigen::MatrixXd M = s.map.evaluate(theta);
    const Eigen::MatrixXd draws = sample_disturbances(s.model, 5000, 16);
    const Eigen::VectorXd adv = adversarial_direction(M, s.model.mean());
    const double adversarial = conditional_risk(M, draws.colwise() + 0.08 * adv).mean;
    int beaten = 0;
    for (int k = 0; k < 10; ++k) {
        const Eigen::VectorXd dir = random_unit(22, rng);
        beaten += adversarial >= conditional_risk(M, draws.colwise() + 0.08 * dir).mean ? 1 : 0;
    }
    CHECK(beaten >= 8);
}
