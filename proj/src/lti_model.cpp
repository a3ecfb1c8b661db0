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

#include "drpac/lti_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drpac {

namespace {

std::string shape(const Eigen::MatrixXd& M) {
    return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

bool is_symmetric(const Eigen::MatrixXd& S) {
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    return (S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

LtiPlant::LtiPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, int horizon)
    : A_(std::move(A)), B_(std::move(B)), horizon_(horizon) {
    if (A_.rows() == 0 || A_.rows() != A_.cols()) {
        throw std::invalid_argument("plant: A must be square and nonempty, got " + shape(A_));
    }
    if (B_.rows() != A_.rows() || B_.cols() == 0) {
        throw std::invalid_argument("plant: B must have " + std::to_string(A_.rows()) +
                                    " rows and at least one column, got " + shape(B_));
    }
    if (horizon_ < 1) {
        throw std::invalid_argument("plant: horizon must be >= 1, got " + std::to_string(horizon_));
    }
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& S, double tol) {
    if (S.rows() != S.cols()) {
        throw std::invalid_argument("symmetric_sqrt: matrix is not square (" + shape(S) + ")");
    }
    if (!is_symmetric(S)) {
        throw std::invalid_argument("symmetric_sqrt: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("symmetric_sqrt: eigendecomposition failed");
    }
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double floor = -tol * std::max(1.0, lambda.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < floor) {
            throw std::invalid_argument("symmetric_sqrt: matrix is not positive semidefinite (eigenvalue " +
                                        std::to_string(lambda(i)) + ")");
        }
        lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    }
    const Eigen::MatrixXd& V = eig.eigenvectors();
    Eigen::MatrixXd root = V * lambda.asDiagonal() * V.transpose();
    return 0.5 * (root + root.transpose());
}

Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& block, int repeats) {
    const Eigen::Index r = block.rows(), c = block.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r * repeats, c * repeats);
    for (int k = 0; k < repeats; ++k) {
        out.block(k * r, k * c, r, c) = block;
    }
    return out;
}

CostWeights::CostWeights(Eigen::MatrixXd state_weight, Eigen::MatrixXd input_weight)
    : Q_(std::move(state_weight)), R_(std::move(input_weight)) {
    try {
        Q_sqrt_ = symmetric_sqrt(Q_);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("weights: state weight Q rejected: ") + e.what());
    }
    try {
        R_sqrt_ = symmetric_sqrt(R_);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("weights: input weight R rejected: ") + e.what());
    }
    const Eigen::VectorXd r_eigs = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(R_, Eigen::EigenvaluesOnly).eigenvalues();
    if (r_eigs.minCoeff() <= 1e-12 * std::max(1.0, r_eigs.maxCoeff())) {
        throw std::invalid_argument("weights: input weight R must be positive definite");
    }
}

Eigen::MatrixXd CostWeights::lifted_state(int horizon) const { return block_diagonal(Q_, horizon + 1); }
Eigen::MatrixXd CostWeights::lifted_input(int horizon) const { return block_diagonal(R_, horizon); }
Eigen::MatrixXd CostWeights::lifted_state_sqrt(int horizon) const { return block_diagonal(Q_sqrt_, horizon + 1); }
Eigen::MatrixXd CostWeights::lifted_input_sqrt(int horizon) const { return block_diagonal(R_sqrt_, horizon); }

Trajectory rollout(const LtiPlant& plant, const Eigen::VectorXd& inputs, const Eigen::VectorXd& w) {
    const int nx = plant.nx(), nu = plant.nu(), T = plant.horizon();
    if (inputs.size() != plant.input_dim()) {
        throw std::invalid_argument("rollout: inputs has " + std::to_string(inputs.size()) +
                                    " entries, expected " + std::to_string(plant.input_dim()));
    }
    if (w.size() != plant.disturbance_dim()) {
        throw std::invalid_argument("rollout: w has " + std::to_string(w.size()) + " entries, expected " +
                                    std::to_string(plant.disturbance_dim()));
    }
    Trajectory traj;
    traj.u = inputs;
    traj.w = w;
    traj.x.resize(plant.disturbance_dim());
    traj.x.head(nx) = w.head(nx);
    for (int k = 0; k < T; ++k) {
        traj.x.segment((k + 1) * nx, nx) = plant.A() * traj.x.segment(k * nx, nx) +
                                           plant.B() * inputs.segment(k * nu, nu) +
                                           w.segment((k + 1) * nx, nx);
    }
    return traj;
}

double trajectory_cost(const CostWeights& weights, const Trajectory& traj) {
    const Eigen::Index nx = weights.state_block().rows();
    const Eigen::Index nu = weights.input_block().rows();
    if (traj.x.size() % nx != 0 || traj.u.size() % nu != 0 || traj.x.size() / nx != traj.u.size() / nu + 1) {
        throw std::invalid_argument("trajectory_cost: trajectory x/u lengths (" + std::to_string(traj.x.size()) +
                                    ", " + std::to_string(traj.u.size()) + ") do not match the weights");
    }
    double total = 0.0;
    for (Eigen::Index t = 0; t < traj.x.size() / nx; ++t) {
        const auto xt = traj.x.segment(t * nx, nx);
        total += xt.dot(weights.state_block() * xt);
    }
    for (Eigen::Index t = 0; t < traj.u.size() / nu; ++t) {
        const auto ut = traj.u.segment(t * nu, nu);
        total += ut.dot(weights.input_block() * ut);
    }
    return std::sqrt(std::max(total, 0.0));
}

}  // namespace drpac
