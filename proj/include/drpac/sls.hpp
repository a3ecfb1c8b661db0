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

#ifndef DRPAC_SLS_HPP
#define DRPAC_SLS_HPP

#include "drpac/lti_model.hpp"

#include <Eigen/Dense>

#include <utility>

namespace drpac {

/// Lifted achievability constraints Fx * Phi_x + Fu * Phi_u = I and their
/// vectorized form F * vec(Phi) = b, where vec(Phi) = [vec(Phi_x); vec(Phi_u)]
/// with column-stacking vec.
struct LiftedConstraints {
    Eigen::MatrixXd Fx;  ///< (T+1)nx x (T+1)nx, identity diagonal, -A subdiagonal
    Eigen::MatrixXd Fu;  ///< (T+1)nx x T nu, -B subdiagonal
    Eigen::MatrixXd F;
    Eigen::VectorXd b;
};

/// Closed-loop responses x = Phi_x w, u = Phi_u w.
struct ClosedLoopResponse {
    Eigen::MatrixXd Phi_x;
    Eigen::MatrixXd Phi_u;
};

using CausalMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * @brief Affine parameterization vec(Phi) = vec(Phi_0) + H theta of the causal
 * achievable closed loops.
 *
 * Coordinate i of theta is the i-th free entry of Phi_u inside the block
 * lower-triangular mask, in column-stacking order. Its basis column sets that
 * entry to one and carries the forced Phi_x response, so theta reads directly
 * as the perturbation of the disturbance-to-input map.
 */
class SlsBasis {
public:
    SlsBasis(const LtiPlant& plant, ClosedLoopResponse baseline, Eigen::MatrixXd H, CausalMask mask);

    int dim() const { return static_cast<int>(H_.cols()); }
    int nx() const { return nx_; }
    int nu() const { return nu_; }
    int horizon() const { return horizon_; }
    int disturbance_dim() const { return (horizon_ + 1) * nx_; }
    int input_dim() const { return horizon_ * nu_; }

    const Eigen::MatrixXd& Phi0_x() const { return baseline_.Phi_x; }
    const Eigen::MatrixXd& Phi0_u() const { return baseline_.Phi_u; }
    const ClosedLoopResponse& baseline() const { return baseline_; }
    const Eigen::MatrixXd& H() const { return H_; }
    const CausalMask& causal_mask() const { return mask_; }

    /// Splits a vec(Phi)-ordered vector back into (Phi_x, Phi_u).
    ClosedLoopResponse unvec(const Eigen::VectorXd& vec_phi) const;

private:
    int nx_, nu_, horizon_;
    ClosedLoopResponse baseline_;
    Eigen::MatrixXd H_;
    CausalMask mask_;
};

LiftedConstraints build_constraints(const LtiPlant& plant);

/// Open-loop baseline: Phi_u = 0 and Phi_x block (k, j) = A^{k-j} for j <= k.
ClosedLoopResponse open_loop_baseline(const LtiPlant& plant);

/// Block lower-triangular pattern of Phi_u: row block k may read disturbance blocks 0..k.
CausalMask causal_input_mask(const LtiPlant& plant);

SlsBasis causal_basis(const LtiPlant& plant, const LiftedConstraints& constraints);

ClosedLoopResponse realize(const SlsBasis& basis, const Eigen::VectorXd& theta);

/// [vec(Phi_x); vec(Phi_u)]
Eigen::VectorXd vectorize(const ClosedLoopResponse& phi);

/// max |Fx Phi_x + Fu Phi_u - I|
double achievability_residual(const LiftedConstraints& constraints, const ClosedLoopResponse& phi);

/// Stacked inputs u_k = Phi_u[k] w, laid out for rollout().
Eigen::VectorXd feedback_inputs(const ClosedLoopResponse& phi, const Eigen::VectorXd& w);

}  // namespace drpac

#endif  // DRPAC_SLS_HPP
