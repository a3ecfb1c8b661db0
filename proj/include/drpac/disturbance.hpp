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

#ifndef DRPAC_DISTURBANCE_HPP
#define DRPAC_DISTURBANCE_HPP

#include "drpac/certificates.hpp"
#include "drpac/pac_bayes.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace drpac {

/// Mean translation of a Gaussian disturbance model. An empty direction means
/// the adversarial one (top right singular vector of M at the posterior mean).
struct ShiftSpec {
    double radius = 0.0;
    std::optional<Eigen::VectorXd> direction;
};

struct TestReport {
    double mean_risk = 0.0;
    double standard_error = 0.0;
    int n_test = 0;
    Eigen::VectorXd shift;                   ///< mean of the evaluated model
    std::vector<double> per_posterior_risk;  ///< mean loss for each posterior sample
};

/// Disturbance draws as matrix columns: mean + Sigma^{1/2} xi for Gaussian
/// models, uniform in the radius-R ball for bounded ones.
Eigen::MatrixXd sample_disturbances(const DisturbanceModel& model, int count, std::uint64_t seed,
                                    std::uint64_t stream = 0);

TrainingSample sample_training(const DisturbanceModel& model, int n, std::uint64_t seed);

/// Unit direction that increases E||M w|| fastest to first order: the top right
/// singular vector of M, signed so that u1' M mean >= 0 (first nonzero entry
/// positive when that product vanishes).
Eigen::VectorXd adversarial_direction(const Eigen::MatrixXd& M, const Eigen::VectorXd& mean);

DisturbanceModel shifted_model(const DisturbanceModel& model, const ShiftSpec& shift, const WeightedMapBasis& map,
                               const Eigen::VectorXd& posterior_mean);

/// Nested Monte-Carlo estimate of E_{theta~Q} E_{w~model} ||M(theta) w||.
/// Posterior sample j takes its noise from stream 2j of `seed` and its n_test
/// disturbance draws from stream 2j + 1, so models that differ only in their
/// mean are evaluated with common random numbers.
TestReport test_risk(const WeightedMapBasis& map, const GaussianPosterior& posterior, const DisturbanceModel& model,
                     int n_test, int m_posterior, std::uint64_t seed);

struct ConditionalRisk {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// E_w ||M w|| for a fixed map, estimated from the given draws.
ConditionalRisk conditional_risk(const Eigen::MatrixXd& M, const Eigen::MatrixXd& draws);

/// Empirical W1 under the coupling that pairs column i of `a` with column i of `b`
/// (an upper bound on W1 of the empirical measures; exact for translations).
double coupled_w1(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace drpac

#endif  // DRPAC_DISTURBANCE_HPP
