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

#ifndef DRPAC_PAC_BAYES_HPP
#define DRPAC_PAC_BAYES_HPP

#include "drpac/certificates.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace drpac {

/// Isotropic Gaussian posterior N(mean, exp(log_sigma)^2 I) over theta.
struct GaussianPosterior {
    Eigen::VectorXd mean;
    double log_sigma = 0.0;

    double sigma() const;
    int dim() const { return static_cast<int>(mean.size()); }
};

/// Zero-mean isotropic prior N(0, sigma^2 I).
struct GaussianPrior {
    explicit GaussianPrior(double sigma);
    double sigma;
};

/// n >= 2 i.i.d. disturbance trajectories stored as matrix columns.
class TrainingSample {
public:
    explicit TrainingSample(Eigen::MatrixXd trajectories);

    const Eigen::MatrixXd& trajectories() const { return W_; }
    int size() const { return static_cast<int>(W_.cols()); }
    int dim() const { return static_cast<int>(W_.rows()); }

private:
    Eigen::MatrixXd W_;
};

struct CertificateBreakdown {
    double gibbs_empirical_risk = 0.0;
    double wasserstein_penalty = 0.0;  ///< rho * E_Q[L(theta)]
    double complexity = 0.0;
    double total_bound = 0.0;
    double kl = 0.0;
    double expected_sigma_sq = 0.0;
    double expected_lipschitz = 0.0;
    double rho = 0.0;
    double delta = 0.0;
    int n = 0;
};

/// Mean of ||M(theta) w_i|| over the columns of `disturbances`.
double empirical_risk(const WeightedMapBasis& map, const Eigen::VectorXd& theta,
                      const Eigen::MatrixXd& disturbances);
double empirical_risk(const WeightedMapBasis& map, const Eigen::VectorXd& theta, const TrainingSample& sample);

struct ValueAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Empirical risk and its theta-gradient; zero-loss trajectories contribute a zero subgradient.
ValueAndGradient empirical_risk_with_gradient(const WeightedMapBasis& map, const Eigen::VectorXd& theta,
                                              const Eigen::MatrixXd& disturbances);

double kl_gaussians(const GaussianPosterior& q, const GaussianPrior& p);

/// sqrt(2 E[sigma^2] (KL + log(n / delta)) / (n - 1))
double complexity_term(double expected_sigma_sq, double kl, int n, double delta);

/// Sample count and seed for the common-random-number estimator.
struct MonteCarloPlan {
    int samples = 24;
    std::uint64_t seed = 0;

    /// d x samples standard-normal draws, fixed by (seed, d).
    Eigen::MatrixXd draw(int dim) const;
};

struct ObjectiveEvaluation {
    CertificateBreakdown breakdown;
    Eigen::VectorXd grad_mean;
    double grad_log_sigma = 0.0;
    int degenerate_count = 0;  ///< MC samples whose top singular value was not simple

    double value() const { return breakdown.total_bound; }
};

/**
 * @brief Robust PAC-Bayes objective over an isotropic Gaussian posterior.
 *
 *   E_Q[ R_S(theta) + rho ||M(theta)||_op ] + C(Q, P, sigma)
 *
 * Expectations use theta_j = mean + sigma_q * eps_j with a noise set drawn once
 * at construction, so the objective is a deterministic smooth (almost
 * everywhere) function of (mean, log_sigma). The same noise set feeds
 * E_Q[sigma(theta)^2] inside the complexity term.
 */
class RobustObjective {
public:
    RobustObjective(const WeightedMapBasis& map, GaussianPrior prior, TrainingSample sample,
                    DisturbanceModel model, double rho, double delta, MonteCarloPlan plan);

    /// Uses an explicit noise set (d x m) instead of drawing one.
    RobustObjective(const WeightedMapBasis& map, GaussianPrior prior, TrainingSample sample,
                    DisturbanceModel model, double rho, double delta, Eigen::MatrixXd noise);

    ObjectiveEvaluation evaluate(const GaussianPosterior& q) const;

    int dim() const { return map_->dim(); }
    double rho() const { return rho_; }
    double delta() const { return delta_; }
    const Eigen::MatrixXd& noise() const { return noise_; }
    const TrainingSample& sample() const { return sample_; }
    const WeightedMapBasis& map() const { return *map_; }
    const DisturbanceModel& model() const { return model_; }
    const GaussianPrior& prior() const { return prior_; }

private:
    const WeightedMapBasis* map_;
    GaussianPrior prior_;
    TrainingSample sample_;
    DisturbanceModel model_;
    double rho_;
    double delta_;
    Eigen::MatrixXd noise_;
    Eigen::MatrixXd scale_;
    double isotropic_scale_ = -1.0;  ///< c when the proxy scale is c I, else negative
};

}  // namespace drpac

#endif  // DRPAC_PAC_BAYES_HPP
