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

#ifndef DRPAC_CERTIFICATES_HPP
#define DRPAC_CERTIFICATES_HPP

#include "drpac/lti_model.hpp"
#include "drpac/sls.hpp"

#include <Eigen/Dense>

#include <vector>

namespace drpac {

/**
 * @brief Affine family M(theta) = M0 + sum_i theta_i M_i of weighted closed-loop maps.
 *
 * M stacks Qc^{1/2} Phi_x(theta) over Rc^{1/2} Phi_u(theta), so that
 * ||M(theta) w|| is the LQ trajectory cost of disturbance w. The basis maps are
 * kept as columns of a single Jacobian matrix (vec(M_i) in column i), which
 * makes both evaluation and the adjoint contraction a single matrix-vector product.
 */
class WeightedMapBasis {
public:
    WeightedMapBasis(Eigen::MatrixXd M0, const std::vector<Eigen::MatrixXd>& basis_maps);

    int dim() const { return static_cast<int>(jacobian_.cols()); }
    Eigen::Index rows() const { return M0_.rows(); }
    Eigen::Index cols() const { return M0_.cols(); }

    const Eigen::MatrixXd& M0() const { return M0_; }
    Eigen::MatrixXd basis_map(int i) const;
    const Eigen::MatrixXd& jacobian() const { return jacobian_; }

    Eigen::MatrixXd evaluate(const Eigen::VectorXd& theta) const;

    /// Component i is <M_i, G> (Frobenius inner product): the theta-gradient of
    /// any scalar whose derivative with respect to M is G.
    Eigen::VectorXd contract(const Eigen::MatrixXd& G) const;

private:
    Eigen::MatrixXd M0_;
    Eigen::MatrixXd jacobian_;
};

WeightedMapBasis build_weighted_basis(const SlsBasis& basis, const CostWeights& weights);

/// M = [Qc^{1/2} Phi_x; Rc^{1/2} Phi_u] built directly from a response.
Eigen::MatrixXd weighted_map(const ClosedLoopResponse& phi, const CostWeights& weights, int horizon);

struct SingularTriplet {
    double value = 0.0;
    Eigen::VectorXd u;  ///< left singular vector
    Eigen::VectorXd v;  ///< right singular vector
    double gap = 0.0;   ///< sigma_1 - sigma_2, +inf when there is a single singular value
};

/// Largest singular value with its singular vectors.
SingularTriplet operator_norm(const Eigen::MatrixXd& M);

/// Trajectory-level disturbance model: Gaussian N(mean, cov) or bounded ||w|| <= R.
class DisturbanceModel {
public:
    enum class Kind { gaussian, bounded };

    static DisturbanceModel gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
    static DisturbanceModel isotropic_gaussian(int dim, double stddev);
    static DisturbanceModel bounded(int dim, double radius);

    Kind kind() const { return kind_; }
    int dim() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    const Eigen::MatrixXd& sqrt_cov() const { return sqrt_cov_; }
    double radius() const { return radius_; }

    /// Sigma^{1/2} for Gaussian models, (R/2) I for bounded ones.
    Eigen::MatrixXd proxy_scale() const;

    DisturbanceModel with_mean(Eigen::VectorXd mean) const;

private:
    DisturbanceModel() = default;

    Kind kind_ = Kind::gaussian;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd sqrt_cov_;
    double radius_ = 0.0;
};

enum class Certificate { lipschitz, sigma };

struct CertificateValues {
    double lipschitz = 0.0;
    double sigma = 0.0;
    SingularTriplet lipschitz_triplet;  ///< of M(theta)
    SingularTriplet sigma_triplet;      ///< of M(theta) S
};

struct CertificateGradient {
    Eigen::VectorXd gradient;
    bool degenerate = false;  ///< top singular value not simple; gradient is a subgradient
};

double lipschitz_certificate(const WeightedMapBasis& map, const Eigen::VectorXd& theta);
double subgaussian_proxy(const WeightedMapBasis& map, const Eigen::VectorXd& theta, const DisturbanceModel& model);
CertificateValues certificate_values(const WeightedMapBasis& map, const Eigen::VectorXd& theta,
                                     const DisturbanceModel& model);
CertificateGradient certificate_gradient(const WeightedMapBasis& map, const Eigen::VectorXd& theta,
                                         Certificate which, const DisturbanceModel& model);

/// Singular-value gap at or below which the top pair is treated as degenerate.
inline constexpr double kDegenerateGap = 1e-10;

}  // namespace drpac

#endif  // DRPAC_CERTIFICATES_HPP
