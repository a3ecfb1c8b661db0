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

#include "drpac/certificates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace drpac {

WeightedMapBasis::WeightedMapBasis(Eigen::MatrixXd M0, const std::vector<Eigen::MatrixXd>& basis_maps)
    : M0_(std::move(M0)) {
    if (M0_.size() == 0) {
        throw std::invalid_argument("WeightedMapBasis: M0 is empty");
    }
    jacobian_.resize(M0_.size(), static_cast<Eigen::Index>(basis_maps.size()));
    for (std::size_t i = 0; i < basis_maps.size(); ++i) {
        const auto& Mi = basis_maps[i];
        if (Mi.rows() != M0_.rows() || Mi.cols() != M0_.cols()) {
            throw std::invalid_argument("WeightedMapBasis: basis map " + std::to_string(i) +
                                        " does not match the shape of M0");
        }
        jacobian_.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(Mi.data(), Mi.size());
    }
}

Eigen::MatrixXd WeightedMapBasis::basis_map(int i) const {
    return Eigen::Map<const Eigen::MatrixXd>(jacobian_.col(i).data(), M0_.rows(), M0_.cols());
}

Eigen::MatrixXd WeightedMapBasis::evaluate(const Eigen::VectorXd& theta) const {
    if (theta.size() != dim()) {
        throw std::invalid_argument("WeightedMapBasis::evaluate: theta has " + std::to_string(theta.size()) +
                                    " entries, expected " + std::to_string(dim()));
    }
    Eigen::MatrixXd M = M0_;
    Eigen::Map<Eigen::VectorXd>(M.data(), M.size()).noalias() += jacobian_ * theta;
    return M;
}

Eigen::VectorXd WeightedMapBasis::contract(const Eigen::MatrixXd& G) const {
    if (G.rows() != M0_.rows() || G.cols() != M0_.cols()) {
        throw std::invalid_argument("WeightedMapBasis::contract: shape mismatch");
    }
    return jacobian_.transpose() * Eigen::Map<const Eigen::VectorXd>(G.data(), G.size());
}

Eigen::MatrixXd weighted_map(const ClosedLoopResponse& phi, const CostWeights& weights, int horizon) {
    const Eigen::MatrixXd Qs = weights.lifted_state_sqrt(horizon);
    const Eigen::MatrixXd Rs = weights.lifted_input_sqrt(horizon);
    if (Qs.cols() != phi.Phi_x.rows() || Rs.cols() != phi.Phi_u.rows()) {
        throw std::invalid_argument("weighted_map: weights do not match the response dimensions");
    }
    Eigen::MatrixXd M(phi.Phi_x.rows() + phi.Phi_u.rows(), phi.Phi_x.cols());
    M.topRows(phi.Phi_x.rows()) = Qs * phi.Phi_x;
    M.bottomRows(phi.Phi_u.rows()) = Rs * phi.Phi_u;
    return M;
}

WeightedMapBasis build_weighted_basis(const SlsBasis& basis, const CostWeights& weights) {
    if (weights.state_block().rows() != basis.nx() || weights.input_block().rows() != basis.nu()) {
        throw std::invalid_argument("build_weighted_basis: weight blocks are " +
                                    std::to_string(weights.state_block().rows()) + "/" +
                                    std::to_string(weights.input_block().rows()) + ", plant has nx=" +
                                    std::to_string(basis.nx()) + ", nu=" + std::to_string(basis.nu()));
    }
    const int T = basis.horizon();
    Eigen::MatrixXd M0 = weighted_map(basis.baseline(), weights, T);
    std::vector<Eigen::MatrixXd> maps;
    maps.reserve(static_cast<std::size_t>(basis.dim()));
    for (int i = 0; i < basis.dim(); ++i) {
        maps.push_back(weighted_map(basis.unvec(basis.H().col(i)), weights, T));
    }
    return WeightedMapBasis(std::move(M0), maps);
}

SingularTriplet operator_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) {
        throw std::invalid_argument("operator_norm: empty matrix");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    SingularTriplet t;
    t.value = s(0);
    t.u = svd.matrixU().col(0);
    t.v = svd.matrixV().col(0);
    t.gap = s.size() > 1 ? s(0) - s(1) : std::numeric_limits<double>::infinity();
    return t;
}

DisturbanceModel DisturbanceModel::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw std::invalid_argument("DisturbanceModel: covariance must be " + std::to_string(mean.size()) + "x" +
                                    std::to_string(mean.size()));
    }
    DisturbanceModel m;
    m.kind_ = Kind::gaussian;
    m.sqrt_cov_ = symmetric_sqrt(cov);
    m.mean_ = std::move(mean);
    m.cov_ = std::move(cov);
    return m;
}

DisturbanceModel DisturbanceModel::isotropic_gaussian(int dim, double stddev) {
    if (dim < 1 || !(stddev >= 0.0)) {
        throw std::invalid_argument("DisturbanceModel: isotropic Gaussian needs dim >= 1 and stddev >= 0");
    }
    return gaussian(Eigen::VectorXd::Zero(dim), stddev * stddev * Eigen::MatrixXd::Identity(dim, dim));
}

DisturbanceModel DisturbanceModel::bounded(int dim, double radius) {
    if (dim < 1 || !(radius > 0.0)) {
        throw std::invalid_argument("DisturbanceModel: bounded model needs dim >= 1 and radius > 0");
    }
    DisturbanceModel m;
    m.kind_ = Kind::bounded;
    m.mean_ = Eigen::VectorXd::Zero(dim);
    m.radius_ = radius;
    return m;
}

Eigen::MatrixXd DisturbanceModel::proxy_scale() const {
    if (kind_ == Kind::gaussian) return sqrt_cov_;
    return 0.5 * radius_ * Eigen::MatrixXd::Identity(dim(), dim());
}

DisturbanceModel DisturbanceModel::with_mean(Eigen::VectorXd mean) const {
    if (mean.size() != mean_.size()) {
        throw std::invalid_argument("DisturbanceModel::with_mean: dimension mismatch");
    }
    DisturbanceModel m = *this;
    m.mean_ = std::move(mean);
    return m;
}

double lipschitz_certificate(const WeightedMapBasis& map, const Eigen::VectorXd& theta) {
    return operator_norm(map.evaluate(theta)).value;
}

double subgaussian_proxy(const WeightedMapBasis& map, const Eigen::VectorXd& theta, const DisturbanceModel& model) {
    return certificate_values(map, theta, model).sigma;
}

CertificateValues certificate_values(const WeightedMapBasis& map, const Eigen::VectorXd& theta,
                                     const DisturbanceModel& model) {
    if (model.dim() != map.cols()) {
        throw std::invalid_argument("certificate_values: disturbance model has dimension " +
                                    std::to_string(model.dim()) + ", map has " + std::to_string(map.cols()) +
                                    " columns");
    }
    const Eigen::MatrixXd M = map.evaluate(theta);
    CertificateValues c;
    c.lipschitz_triplet = operator_norm(M);
    c.lipschitz = c.lipschitz_triplet.value;
    if (model.kind() == DisturbanceModel::Kind::bounded) {
        // (R/2) I scales every singular value and leaves the vectors alone.
        c.sigma_triplet = c.lipschitz_triplet;
        c.sigma_triplet.value *= 0.5 * model.radius();
        c.sigma_triplet.gap *= 0.5 * model.radius();
    } else {
        c.sigma_triplet = operator_norm(M * model.sqrt_cov());
    }
    c.sigma = c.sigma_triplet.value;
    return c;
}

CertificateGradient certificate_gradient(const WeightedMapBasis& map, const Eigen::VectorXd& theta,
                                         Certificate which, const DisturbanceModel& model) {
    const CertificateValues c = certificate_values(map, theta, model);
    CertificateGradient g;
    if (which == Certificate::lipschitz) {
        const auto& t = c.lipschitz_triplet;
        g.gradient = map.contract(t.u * t.v.transpose());
        g.degenerate = t.gap <= kDegenerateGap;
    } else {
        // d sigma / d theta_i = u' M_i S v
        const auto& t = c.sigma_triplet;
        const Eigen::VectorXd Sv = model.proxy_scale() * t.v;
        g.gradient = map.contract(t.u * Sv.transpose());
        g.degenerate = t.gap <= kDegenerateGap;
    }
    return g;
}

}  // namespace drpac
