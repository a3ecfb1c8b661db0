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
#include "drpac/pac_bayes.hpp"
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

// KL(N(0, a^2) || N(0, b^2)) in one dimension by composite Simpson quadrature of q log(q/p).
double kl_1d_quadrature(double a, double b) {
    const int panels = 200000;
    const double lo = -12.0 * a, hi = 12.0 * a;
    const double h = (hi - lo) / panels;
    auto integrand = [&](double x) {
        const double log_q = -0.5 * x * x / (a * a) - std::log(a) - 0.5 * std::log(2.0 * M_PI);
        const double log_p = -0.5 * x * x / (b * b) - std::log(b) - 0.5 * std::log(2.0 * M_PI);
        return std::exp(log_q) * (log_q - log_p);
    };
    double sum = integrand(lo) + integrand(hi);
    for (int i = 1; i < panels; ++i) sum += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

GaussianPosterior posterior(Eigen::VectorXd mean, double sigma) {
    GaussianPosterior q;
    q.mean = std::move(mean);
    q.log_sigma = std::log(sigma);
    return q;
}

}  // namespace

TEST_CASE("empirical risk edge values") {
    const auto& s = fixture();
    CHECK(empirical_risk(s.map, Eigen::VectorXd::Zero(110), Eigen::MatrixXd::Zero(22, 5)) == 0.0);

    const WeightedMapBasis identity(Eigen::MatrixXd::Identity(3, 3), {Eigen::MatrixXd::Zero(3, 3)});
    Eigen::MatrixXd w(3, 1);
    w << 1.0, -2.0, 2.0;
    CHECK(empirical_risk(identity, Eigen::VectorXd::Zero(1), w) == doctest::Approx(3.0));

    CHECK_THROWS_AS(empirical_risk(s.map, Eigen::VectorXd::Zero(110), Eigen::MatrixXd::Zero(21, 2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(TrainingSample(Eigen::MatrixXd::Zero(22, 1)), std::invalid_argument);
}

TEST_CASE("empirical risk matches the mean rollout cost") {
    const auto& s = fixture();
    const TrainingSample sample = sample_training(s.model, 100, 41);
    const ClosedLoopResponse phi = realize(s.basis, Eigen::VectorXd::Zero(110));
    double oracle = 0.0;
    for (int i = 0; i < sample.size(); ++i) {
        const Eigen::VectorXd w = sample.trajectories().col(i);
        oracle += trajectory_cost(s.weights, rollout(s.plant, feedback_inputs(phi, w), w));
    }
    oracle /= sample.size();
    CHECK(std::abs(empirical_risk(s.map, Eigen::VectorXd::Zero(110), sample) - oracle) <= 1e-10);
}

TEST_CASE("empirical risk gradient") {
    const auto& s = fixture();
    const TrainingSample sample = sample_training(s.model, 12, 42);
    auto rng = make_rng(43);
    const Eigen::VectorXd theta = 0.3 * standard_normal(110, 1, rng);
    const ValueAndGradient vg = empirical_risk_with_gradient(s.map, theta, sample.trajectories());
    auto f = [&](const Eigen::VectorXd& x) { return empirical_risk(s.map, x, sample); };
    CHECK(vg.value == doctest::Approx(f(theta)).epsilon(1e-14));
    CHECK(testing::relative_error(vg.gradient, testing::central_difference(f, theta, 1e-6)) <= 1e-6);

    SUBCASE("zero-loss trajectories contribute nothing") {
        Eigen::MatrixXd W = sample.trajectories();
        W.col(0).setZero();
        const ValueAndGradient with_zero = empirical_risk_with_gradient(s.map, theta, W);
        CHECK(with_zero.gradient.allFinite());
        const ValueAndGradient rest = empirical_risk_with_gradient(s.map, theta, W.rightCols(W.cols() - 1));
        const double scale = static_cast<double>(W.cols() - 1) / static_cast<double>(W.cols());
        CHECK((with_zero.gradient - scale * rest.gradient).norm() <= 1e-14 * rest.gradient.norm());
    }
}

TEST_CASE("KL divergence between isotropic Gaussians") {
    const GaussianPrior prior(1.5);
    CHECK(kl_gaussians(posterior(Eigen::VectorXd::Zero(4), 1.5), prior) == doctest::Approx(0.0).epsilon(1e-15));

    const GaussianPrior p2(2.0);
    CHECK(kl_gaussians(posterior(Eigen::VectorXd::Constant(1, 2.0), 2.0), p2) == doctest::Approx(0.5));

    // d = 2, mu = 0, sigma_q = 1, sigma_p = 2: two independent 1-D terms.
    const double oracle = 2.0 * kl_1d_quadrature(1.0, 2.0);
    CHECK(oracle == doctest::Approx(0.5 * (2.0 * 0.25 - 2.0 + 2.0 * std::log(4.0))).epsilon(1e-9));
    CHECK(kl_gaussians(posterior(Eigen::VectorXd::Zero(2), 1.0), p2) == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(kl_gaussians(posterior(Eigen::VectorXd::Zero(2), 1.0), p2) == doctest::Approx(0.63629).epsilon(1e-5));

    SUBCASE("nonnegative, and zero only at the prior") {
        auto rng = make_rng(44);
        for (int trial = 0; trial < 200; ++trial) {
            const Eigen::VectorXd mean = standard_normal(5, 1, rng) * (trial % 3 == 0 ? 0.0 : 1.0);
            const double sigma = std::exp(standard_normal(1, 1, rng)(0));
            const double kl = kl_gaussians(posterior(mean, sigma), prior);
            CHECK(kl >= 0.0);
            if (mean.norm() > 1e-3 || std::abs(sigma - 1.5) > 1e-3) CHECK(kl > 0.0);
        }
    }
    CHECK_THROWS_AS(GaussianPrior(0.0), std::invalid_argument);
}

TEST_CASE("complexity term") {
    CHECK(complexity_term(0.0, 5.0, 10, 0.05) == 0.0);
    // KL + log(n / delta) = 50 at n = 101
    const double kl = 50.0 - std::log(101.0 / 0.05);
    CHECK(complexity_term(2.0, kl, 101, 0.05) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    SUBCASE("doubling n - 1 with a fixed numerator divides by sqrt 2") {
        const int n1 = 51, n2 = 101;
        // Keep KL + log(n / delta) fixed across n.
        const double a = complexity_term(1.3, 20.0 - std::log(n1 / 0.05), n1, 0.05);
        const double b = complexity_term(1.3, 20.0 - std::log(n2 / 0.05), n2, 0.05);
        CHECK(a / b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    }
    SUBCASE("monotone in each argument") {
        CHECK(complexity_term(1.0, 3.0, 20, 0.05) < complexity_term(1.1, 3.0, 20, 0.05));
        CHECK(complexity_term(1.0, 3.0, 20, 0.05) < complexity_term(1.0, 3.5, 20, 0.05));
        CHECK(complexity_term(1.0, 3.0, 20, 0.05) > complexity_term(1.0, 3.0, 40, 0.05));
    }
    CHECK_THROWS_AS(complexity_term(1.0, 1.0, 1, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(complexity_term(1.0, 1.0, 10, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(complexity_term(-1.0, 1.0, 10, 0.5), std::invalid_argument);
}

TEST_CASE("robust objective") {
    const auto& s = fixture();
    const TrainingSample sample = sample_training(s.model, 32, 45);
    const GaussianPrior prior(1.0);
    auto rng = make_rng(46);
    const GaussianPosterior q = posterior(0.2 * standard_normal(110, 1, rng), 0.05);

    SUBCASE("rho = 0 reduces to the nominal bound") {
        const RobustObjective obj(s.map, prior, sample, s.model, 0.0, 0.05, MonteCarloPlan{8, 7});
        const auto b = obj.evaluate(q).breakdown;
        CHECK(b.wasserstein_penalty == 0.0);
        CHECK(b.total_bound == b.gibbs_empirical_risk + b.complexity);
    }
    SUBCASE("point-mass limit equals the deterministic bound at the mean") {
        const RobustObjective obj(s.map, prior, sample, s.model, 0.08, 0.05, Eigen::MatrixXd::Zero(110, 1));
        const auto b = obj.evaluate(q).breakdown;
        const double L = lipschitz_certificate(s.map, q.mean);
        const double sigma = subgaussian_proxy(s.map, q.mean, s.model);
        CHECK(b.gibbs_empirical_risk == doctest::Approx(empirical_risk(s.map, q.mean, sample)).epsilon(1e-14));
        CHECK(b.wasserstein_penalty == doctest::Approx(0.08 * L).epsilon(1e-14));
        CHECK(b.complexity ==
              doctest::Approx(complexity_term(sigma * sigma, kl_gaussians(q, prior), 32, 0.05)).epsilon(1e-12));
        CHECK(b.total_bound == b.gibbs_empirical_risk + b.wasserstein_penalty + b.complexity);
    }
    SUBCASE("identical inputs give bit-identical results") {
        const RobustObjective obj(s.map, prior, sample, s.model, 0.08, 0.05, MonteCarloPlan{8, 9});
        const auto a = obj.evaluate(q);
        const auto b = obj.evaluate(q);
        CHECK(a.breakdown.total_bound == b.breakdown.total_bound);
        CHECK(a.grad_mean == b.grad_mean);
        CHECK(a.grad_log_sigma == b.grad_log_sigma);
        const RobustObjective again(s.map, prior, sample, s.model, 0.08, 0.05, MonteCarloPlan{8, 9});
        CHECK(again.evaluate(q).breakdown.total_bound == a.breakdown.total_bound);
    }
    SUBCASE("total bound is nondecreasing in rho") {
        double previous = -1.0;
        for (double rho : {0.0, 0.01, 0.05, 0.08, 0.2}) {
            const RobustObjective obj(s.map, prior, sample, s.model, rho, 0.05, MonteCarloPlan{8, 10});
            const double total = obj.evaluate(q).breakdown.total_bound;
            CHECK(total >= previous);
            previous = total;
        }
    }
    SUBCASE("gradient matches central differences in (mean, log sigma)") {
        const RobustObjective obj(s.map, prior, sample, s.model, 0.08, 0.05, MonteCarloPlan{8, 11});
        for (int trial = 0; trial < 10; ++trial) {
            const GaussianPosterior p = posterior(0.3 * standard_normal(110, 1, rng), std::exp(-3.0 + 0.3 * trial));
            const ObjectiveEvaluation e = obj.evaluate(p);
            if (e.degenerate_count > 0) continue;
            Eigen::VectorXd x(111), g(111);
            x << p.mean, p.log_sigma;
            g << e.grad_mean, e.grad_log_sigma;
            auto f = [&](const Eigen::VectorXd& z) {
                GaussianPosterior zq;
                zq.mean = z.head(110);
                zq.log_sigma = z(110);
                return obj.evaluate(zq).value();
            };
            CAPTURE(trial);
            CHECK(testing::relative_error(g, testing::central_difference(f, x, 1e-6)) <= 1e-4);
        }
    }
    SUBCASE("dimension and plan validation") {
        CHECK_THROWS_AS(RobustObjective(s.map, prior, sample, s.model, 0.08, 0.05, MonteCarloPlan{0, 1}),
                        std::invalid_argument);
        const RobustObjective obj(s.map, prior, sample, s.model, 0.08, 0.05, MonteCarloPlan{2, 1});
        CHECK_THROWS_AS(obj.evaluate(posterior(Eigen::VectorXd::Zero(3), 0.1)), std::invalid_argument);
    }
}

TEST_CASE("Monte-Carlo plan draws are fixed by the seed") {
    const MonteCarloPlan plan{24, 5};
    CHECK(plan.draw(110) == plan.draw(110));
    CHECK(plan.draw(110) != MonteCarloPlan({24, 6}).draw(110));
    CHECK(plan.draw(110).cols() == 24);
}
