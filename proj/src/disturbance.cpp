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

#include <cmath>
#include <stdexcept>
#include <string>

namespace drpac {

Eigen::MatrixXd sample_disturbances(const DisturbanceModel& model, int count, std::uint64_t seed,
                                    std::uint64_t stream) {
    if (count < 1) throw std::invalid_argument("sample_disturbances: count must be >= 1");
    auto rng = make_rng(seed, stream);
    const Eigen::Index dim = model.dim();
    Eigen::MatrixXd xi = standard_normal(dim, count, rng);
    if (model.kind() == DisturbanceModel::Kind::gaussian) {
        Eigen::MatrixXd W = model.sqrt_cov() * xi;
        W.colwise() += model.mean();
        return W;
    }
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (Eigen::Index i = 0; i < xi.cols(); ++i) {
        const double norm = xi.col(i).norm();
        const double r = model.radius() * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
        xi.col(i) *= norm > 0.0 ? r / norm : 0.0;
    }
    xi.colwise() += model.mean();
    return xi;
}

TrainingSample sample_training(const DisturbanceModel& model, int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("sample_training: need n >= 2, got " + std::to_string(n));
    return TrainingSample(sample_disturbances(model, n, seed, 0x747261696eULL));
}

Eigen::VectorXd adversarial_direction(const Eigen::MatrixXd& M, const Eigen::VectorXd& mean) {
    const SingularTriplet top = operator_norm(M);
    Eigen::VectorXd v = top.v;
    const double drift = top.u.dot(M * mean);
    double sign = 1.0;
    if (drift != 0.0) {
        sign = drift > 0.0 ? 1.0 : -1.0;
    } else {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (v(i) != 0.0) {
                sign = v(i) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
    }
    return sign * v;
}

DisturbanceModel shifted_model(const DisturbanceModel& model, const ShiftSpec& shift, const WeightedMapBasis& map,
                               const Eigen::VectorXd& posterior_mean) {
    if (!(shift.radius >= 0.0)) throw std::invalid_argument("shifted_model: shift radius must be >= 0");
    if (shift.radius == 0.0) return model;
    if (model.kind() != DisturbanceModel::Kind::gaussian) {
        throw std::invalid_argument("shifted_model: only Gaussian models support mean-translation shifts");
    }

    Eigen::VectorXd direction;
    if (shift.direction) {
        direction = *shift.direction;
        if (direction.size() != model.dim()) {
            throw std::invalid_argument("shifted_model: direction has length " + std::to_string(direction.size()) +
                                        ", expected " + std::to_string(model.dim()));
        }
        if (std::abs(direction.norm() - 1.0) > 1e-9) {
            throw std::invalid_argument("shifted_model: direction must be a unit vector");
        }
    } else {
        direction = adversarial_direction(map.evaluate(posterior_mean), model.mean());
    }
    return model.with_mean(model.mean() + shift.radius * direction);
}

ConditionalRisk conditional_risk(const Eigen::MatrixXd& M, const Eigen::MatrixXd& draws) {
    const Eigen::VectorXd losses = (M * draws).colwise().norm().transpose();
    ConditionalRisk r;
    const double n = static_cast<double>(losses.size());
    r.mean = losses.mean();
    if (losses.size() > 1) {
        const double var = (losses.array() - r.mean).square().sum() / (n - 1.0);
        r.standard_error = std::sqrt(var / n);
    }
    return r;
}

TestReport test_risk(const WeightedMapBasis& map, const GaussianPosterior& posterior, const DisturbanceModel& model,
                     int n_test, int m_posterior, std::uint64_t seed) {
    if (n_test < 1 || m_posterior < 1) throw std::invalid_argument("test_risk: counts must be >= 1");
    if (posterior.dim() != map.dim()) throw std::invalid_argument("test_risk: posterior dimension mismatch");

    TestReport report;
    report.n_test = n_test;
    report.shift = model.mean();
    report.per_posterior_risk.reserve(static_cast<std::size_t>(m_posterior));
    const double s = posterior.sigma();
    double within_se = 0.0;
    for (int j = 0; j < m_posterior; ++j) {
        auto rng = make_rng(seed, 2 * static_cast<std::uint64_t>(j));
        const Eigen::VectorXd eps = standard_normal(map.dim(), 1, rng);
        const Eigen::VectorXd theta = posterior.mean + s * eps;
        const Eigen::MatrixXd draws = sample_disturbances(model, n_test, seed, 2 * static_cast<std::uint64_t>(j) + 1);
        const ConditionalRisk r = conditional_risk(map.evaluate(theta), draws);
        report.per_posterior_risk.push_back(r.mean);
        within_se = r.standard_error;
    }
    const Eigen::Map<const Eigen::VectorXd> risks(report.per_posterior_risk.data(), m_posterior);
    report.mean_risk = risks.mean();
    if (m_posterior > 1) {
        const double var = (risks.array() - report.mean_risk).square().sum() / (m_posterior - 1.0);
        report.standard_error = std::sqrt(var / m_posterior);
    } else {
        report.standard_error = within_se;
    }
    return report;
}

double coupled_w1(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() == 0) {
        throw std::invalid_argument("coupled_w1: sample sets must have the same nonzero shape");
    }
    return (a - b).colwise().norm().mean();
}

}  // namespace drpac
