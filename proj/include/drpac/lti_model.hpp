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

#ifndef DRPAC_LTI_MODEL_HPP
#define DRPAC_LTI_MODEL_HPP

#include <Eigen/Dense>

namespace drpac {

/**
 * @brief Discrete-time LTI plant x_{k+1} = A x_k + B u_k + w_k over a finite horizon.
 *
 * Stacked vectors follow a single block ordering everywhere in the library:
 * states (x_0, ..., x_T), inputs (u_0, ..., u_{T-1}) and disturbances
 * (x_0, w_0, ..., w_{T-1}), i.e. the initial state is the first disturbance block.
 */
class LtiPlant {
public:
    LtiPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, int horizon);

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }
    int horizon() const { return horizon_; }
    int nx() const { return static_cast<int>(A_.rows()); }
    int nu() const { return static_cast<int>(B_.cols()); }

    /// (T+1) * nx, the length of stacked state and disturbance vectors.
    int disturbance_dim() const { return (horizon_ + 1) * nx(); }
    /// T * nu
    int input_dim() const { return horizon_ * nu(); }

private:
    Eigen::MatrixXd A_;
    Eigen::MatrixXd B_;
    int horizon_;
};

/**
 * @brief Per-step LQ weights and their lifted block-diagonal forms.
 *
 * The constructor factors both blocks with a symmetric square root; a state
 * weight that is not PSD or an input weight that is not PD is rejected.
 */
class CostWeights {
public:
    CostWeights(Eigen::MatrixXd state_weight, Eigen::MatrixXd input_weight);

    const Eigen::MatrixXd& state_block() const { return Q_; }
    const Eigen::MatrixXd& input_block() const { return R_; }
    const Eigen::MatrixXd& state_block_sqrt() const { return Q_sqrt_; }
    const Eigen::MatrixXd& input_block_sqrt() const { return R_sqrt_; }

    Eigen::MatrixXd lifted_state(int horizon) const;
    Eigen::MatrixXd lifted_input(int horizon) const;
    Eigen::MatrixXd lifted_state_sqrt(int horizon) const;
    Eigen::MatrixXd lifted_input_sqrt(int horizon) const;

private:
    Eigen::MatrixXd Q_;
    Eigen::MatrixXd R_;
    Eigen::MatrixXd Q_sqrt_;
    Eigen::MatrixXd R_sqrt_;
};

struct Trajectory {
    Eigen::VectorXd x;  ///< (T+1) * nx
    Eigen::VectorXd u;  ///< T * nu
    Eigen::VectorXd w;  ///< (T+1) * nx, first block is x_0
};

/// Simulates the plant step by step with the given stacked inputs.
Trajectory rollout(const LtiPlant& plant, const Eigen::VectorXd& inputs,
                   const Eigen::VectorXd& w);

/// (sum_t x_t' Q x_t + sum_t u_t' R u_t)^{1/2}
double trajectory_cost(const CostWeights& weights, const Trajectory& traj);

/// Symmetric PSD square root via eigendecomposition; eigenvalues within
/// `tol * max(1, |lambda_max|)` below zero are clamped, anything more negative throws.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& S, double tol = 1e-12);

Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& block, int repeats);

}  // namespace drpac

#endif  // DRPAC_LTI_MODEL_HPP
