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

#include "drpac/sls.hpp"

#include <stdexcept>
#include <string>

namespace drpac {

SlsBasis::SlsBasis(const LtiPlant& plant, ClosedLoopResponse baseline, Eigen::MatrixXd H, CausalMask mask)
    : nx_(plant.nx()), nu_(plant.nu()), horizon_(plant.horizon()), baseline_(std::move(baseline)),
      H_(std::move(H)), mask_(std::move(mask)) {
    const Eigen::Index N = disturbance_dim();
    const Eigen::Index vec_len = N * N + N * input_dim();
    if (baseline_.Phi_x.rows() != N || baseline_.Phi_x.cols() != N || baseline_.Phi_u.rows() != input_dim() ||
        baseline_.Phi_u.cols() != N) {
        throw std::invalid_argument("SlsBasis: baseline response has the wrong shape");
    }
    if (H_.rows() != vec_len) {
        throw std::invalid_argument("SlsBasis: H has " + std::to_string(H_.rows()) + " rows, expected " +
                                    std::to_string(vec_len));
    }
    if (mask_.rows() != input_dim() || mask_.cols() != N) {
        throw std::invalid_argument("SlsBasis: causal mask has the wrong shape");
    }
}

ClosedLoopResponse SlsBasis::unvec(const Eigen::VectorXd& vec_phi) const {
    const Eigen::Index N = disturbance_dim();
    if (vec_phi.size() != H_.rows()) {
        throw std::invalid_argument("unvec: vector has " + std::to_string(vec_phi.size()) + " entries, expected " +
                                    std::to_string(H_.rows()));
    }
    ClosedLoopResponse phi;
    phi.Phi_x = Eigen::Map<const Eigen::MatrixXd>(vec_phi.data(), N, N);
    phi.Phi_u = Eigen::Map<const Eigen::MatrixXd>(vec_phi.data() + N * N, input_dim(), N);
    return phi;
}

LiftedConstraints build_constraints(const LtiPlant& plant) {
    const int nx = plant.nx(), nu = plant.nu(), T = plant.horizon();
    const int N = plant.disturbance_dim();
    const int U = plant.input_dim();

    LiftedConstraints c;
    c.Fx = Eigen::MatrixXd::Identity(N, N);
    c.Fu = Eigen::MatrixXd::Zero(N, U);
    for (int k = 0; k < T; ++k) {
        c.Fx.block((k + 1) * nx, k * nx, nx, nx) = -plant.A();
        c.Fu.block((k + 1) * nx, k * nu, nx, nu) = -plant.B();
    }

    // vec(Fx Phi_x) = (I_N kron Fx) vec(Phi_x), likewise for Fu.
    c.F = Eigen::MatrixXd::Zero(N * N, N * N + N * U);
    for (int col = 0; col < N; ++col) {
        c.F.block(col * N, col * N, N, N) = c.Fx;
        c.F.block(col * N, N * N + col * U, N, U) = c.Fu;
    }
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
    c.b = Eigen::Map<const Eigen::VectorXd>(I.data(), N * N);
    return c;
}

ClosedLoopResponse open_loop_baseline(const LtiPlant& plant) {
    const int nx = plant.nx(), T = plant.horizon();
    const int N = plant.disturbance_dim();
    ClosedLoopResponse phi;
    phi.Phi_x = Eigen::MatrixXd::Zero(N, N);
    phi.Phi_u = Eigen::MatrixXd::Zero(plant.input_dim(), N);

    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(nx, nx);
    for (int lag = 0; lag <= T; ++lag) {
        for (int j = 0; j + lag <= T; ++j) {
            phi.Phi_x.block((j + lag) * nx, j * nx, nx, nx) = power;
        }
        power = plant.A() * power;
    }
    return phi;
}

CausalMask causal_input_mask(const LtiPlant& plant) {
    const int nx = plant.nx(), nu = plant.nu();
    CausalMask mask(plant.input_dim(), plant.disturbance_dim());
    for (Eigen::Index row = 0; row < mask.rows(); ++row) {
        for (Eigen::Index col = 0; col < mask.cols(); ++col) {
            mask(row, col) = (col / nx) <= (row / nu);
        }
    }
    return mask;
}

SlsBasis causal_basis(const LtiPlant& plant, const LiftedConstraints& constraints) {
    const int nx = plant.nx(), nu = plant.nu(), T = plant.horizon();
    const int N = plant.disturbance_dim();
    const int U = plant.input_dim();
    const CausalMask mask = causal_input_mask(plant);

    if (constraints.F.rows() != N * N || constraints.F.cols() != N * N + N * U) {
        throw std::invalid_argument("causal_basis: constraints were not built for this plant");
    }

    const int d = nu * nx * T * (T + 1) / 2;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N * N + N * U, d);

    int i = 0;
    for (int col = 0; col < N; ++col) {
        for (int row = 0; row < U; ++row) {
            if (!mask(row, col)) continue;
            const int k = row / nu;
            const int r = row % nu;
            H(N * N + col * U + row, i) = 1.0;
            // Forced state response in column `col`: Phi_x[k+1] picks up B e_r,
            // then propagates through A with no further input perturbation.
            Eigen::VectorXd state = plant.B().col(r);
            for (int step = k + 1; step <= T; ++step) {
                H.block(col * N + step * nx, i, nx, 1) = state;
                state = plant.A() * state;
            }
            ++i;
        }
    }

    const double residual = (constraints.F * H).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (residual > 1e-12 * scale * N) {
        throw std::logic_error("causal_basis: basis leaves the nullspace of F (residual " +
                               std::to_string(residual) + ")");
    }
    return SlsBasis(plant, open_loop_baseline(plant), std::move(H), mask);
}

Eigen::VectorXd vectorize(const ClosedLoopResponse& phi) {
    Eigen::VectorXd v(phi.Phi_x.size() + phi.Phi_u.size());
    v.head(phi.Phi_x.size()) = Eigen::Map<const Eigen::VectorXd>(phi.Phi_x.data(), phi.Phi_x.size());
    v.tail(phi.Phi_u.size()) = Eigen::Map<const Eigen::VectorXd>(phi.Phi_u.data(), phi.Phi_u.size());
    return v;
}

ClosedLoopResponse realize(const SlsBasis& basis, const Eigen::VectorXd& theta) {
    if (theta.size() != basis.dim()) {
        throw std::invalid_argument("realize: theta has " + std::to_string(theta.size()) + " entries, expected " +
                                    std::to_string(basis.dim()));
    }
    return basis.unvec(vectorize(basis.baseline()) + basis.H() * theta);
}

double achievability_residual(const LiftedConstraints& constraints, const ClosedLoopResponse& phi) {
    const Eigen::MatrixXd lhs = constraints.Fx * phi.Phi_x + constraints.Fu * phi.Phi_u;
    return (lhs - Eigen::MatrixXd::Identity(lhs.rows(), lhs.cols())).cwiseAbs().maxCoeff();
}

Eigen::VectorXd feedback_inputs(const ClosedLoopResponse& phi, const Eigen::VectorXd& w) {
    if (w.size() != phi.Phi_u.cols()) {
        throw std::invalid_argument("feedback_inputs: w has " + std::to_string(w.size()) + " entries, expected " +
                                    std::to_string(phi.Phi_u.cols()));
    }
    return phi.Phi_u * w;
}

}  // namespace drpac
