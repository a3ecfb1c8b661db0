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

#include "drpac/pac_bayes.hpp"

#include "drpac/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drpac {

double GaussianPosterior::sigma() const { return std::exp(log_sigma); }

GaussianPrior::GaussianPrior(double s) : sigma(s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("GaussianPrior: sigma must be positive and finite");
    }
}

TrainingSample::TrainingSample(Eigen::MatrixXd trajectories) : W_(std::move(trajectories)) {
    if (W_.cols() < 2) {
        throw std::invalid_argument("TrainingSample: need n >= 2 trajectories, got " + std::to_string(W_.cols()));
    }
}

namespace {

void check_columns(const WeightedMapBasis& map, const Eigen::MatrixXd& W, const char* who) {
    if (W.cols() < 1) {
        throw std::invalid_argument(std::string(who) + ": need at least one trajectory");
    }
    if (W.rows() != map.cols()) {
        throw std::invalid_argument(std::string(who) + ": trajectories have length " + std::to_string(W.rows()) +
                                    ", map expects " + std::to_string(map.cols()));
    }
}

// Y = M W; returns mean column norm and fills `G` with dR/dM = (1/n) sum_i (y_i / ||y_i||) w_i'.
double risk_and_output_gradient(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W, Eigen::MatrixXd* G) {
    Eigen::MatrixXd Y = M * W;
    const double inv_n = 1.0 / static_cast<double>(W.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
        const double norm = Y.col(i).norm();
        total += norm;
        if (G) Y.col(i) *= norm > 0.0 ? 1.0 / norm : 0.0;
    }
    if (G) G->noalias() = inv_n * (Y * W.transpose());
    return total * inv_n;
}

}  // namespace

double empirical_risk(const WeightedMapBasis& map, const Eigen::VectorXd& theta, const Eigen::MatrixXd& disturbances) {
    check_columns(map, disturbances, "empirical_risk");
    return risk_and_output_gradient(map.evaluate(theta), disturbances, nullptr);
}

double empirical_risk(const WeightedMapBasis& map, const Eigen::VectorXd& theta, const TrainingSample& sample) {
    return empirical_risk(map, theta, sample.trajectories());
}

ValueAndGradient empirical_risk_with_gradient(const WeightedMapBasis& map, const Eigen::VectorXd& theta,
                                              const Eigen::MatrixXd& disturbances) {
    check_columns(map, disturbances, "empirical_risk");
    Eigen::MatrixXd G;
    ValueAndGradient out;
    out.value = risk_and_output_gradient(map.evaluate(theta), disturbances, &G);
    out.gradient = map.contract(G);
    return out;
}

double kl_gaussians(const GaussianPosterior& q, const GaussianPrior& p) {
    const double d = static_cast<double>(q.dim());
    const double var_ratio = std::exp(2.0 * q.log_sigma) / (p.sigma * p.sigma);
    const double mean_term = q.mean.squaredNorm() / (p.sigma * p.sigma);
    // d * ln(sigma_p^2 / sigma_q^2) written via logs to stay finite for tiny sigma_q.
    const double log_term = 2.0 * d * (std::log(p.sigma) - q.log_sigma);
    return 0.5 * (d * var_ratio + mean_term - d + log_term);
}

double complexity_term(double expected_sigma_sq, double kl, int n, double delta) {
    if (n < 2) {
        throw std::invalid_argument("complexity_term: n must be >= 2, got " + std::to_string(n));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("complexity_term: delta must lie in (0, 1)");
    }
    if (!(expected_sigma_sq >= 0.0)) {
        throw std::invalid_argument("complexity_term: expected sigma^2 must be nonnegative");
    }
    const double numerator = 2.0 * expected_sigma_sq * (kl + std::log(static_cast<double>(n) / delta));
    return std::sqrt(numerator / static_cast<double>(n - 1));
}

Eigen::MatrixXd MonteCarloPlan::draw(int dim) const {
    if (samples < 1) {
        throw std::invalid_argument("MonteCarloPlan: need at least one sample, got " + std::to_string(samples));
    }
    auto rng = make_rng(seed, 0x6d63u);
    return standard_normal(dim, samples, rng);
}

RobustObjective::RobustObjective(const WeightedMapBasis& map, GaussianPrior prior, TrainingSample sample,
                                 DisturbanceModel model, double rho, double delta, MonteCarloPlan plan)
    : RobustObjective(map, prior, std::move(sample), std::move(model), rho, delta, plan.draw(map.dim())) {}

RobustObjective::RobustObjective(const WeightedMapBasis& map, GaussianPrior prior, TrainingSample sample,
                                 DisturbanceModel model, double rho, double delta, Eigen::MatrixXd noise)
    : map_(&map), prior_(prior), sample_(std::move(sample)), model_(std::move(model)), rho_(rho), delta_(delta),
      noise_(std::move(noise)) {
    if (!(rho_ >= 0.0)) throw std::invalid_argument("RobustObjective: rho must be >= 0");
    if (!(delta_ > 0.0 && delta_ < 1.0)) throw std::invalid_argument("RobustObjective: delta must lie in (0, 1)");
    if (noise_.rows() != map.dim() || noise_.cols() < 1) {
        throw std::invalid_argument("RobustObjective: noise set must be d x m with m >= 1");
    }
    if (sample_.dim() != map.cols() || model_.dim() != map.cols()) {
        throw std::invalid_argument("RobustObjective: sample/model dimension does not match the map");
    }
    scale_ = model_.proxy_scale();
    const double c = scale_(0, 0);
    if ((scale_ - c * Eigen::MatrixXd::Identity(scale_.rows(), scale_.cols())).cwiseAbs().maxCoeff() == 0.0) {
        isotropic_scale_ = c;
    }
}

ObjectiveEvaluation RobustObjective::evaluate(const GaussianPosterior& q) const {
    const int d = dim();
    if (q.dim() != d) {
        throw std::invalid_argument("RobustObjective: posterior has d=" + std::to_string(q.dim()) +
                                    ", basis has d=" + std::to_string(d));
    }
    const Eigen::Index m = noise_.cols();
    const double s = q.sigma();
    const Eigen::MatrixXd& W = sample_.trajectories();

    std::vector<Eigen::MatrixXd> risk_lip_grad(static_cast<std::size_t>(m));
    std::vector<Eigen::MatrixXd> sigma_grad(static_cast<std::size_t>(m));
    std::vector<double> sigmas(static_cast<std::size_t>(m));

    double gibbs = 0.0, lip = 0.0, sigma_sq = 0.0;
    int degenerate = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const Eigen::VectorXd theta = q.mean + s * noise_.col(j);
        const Eigen::MatrixXd M = map_->evaluate(theta);

        Eigen::MatrixXd G;
        gibbs += risk_and_output_gradient(M, W, &G);

        const SingularTriplet top = operator_norm(M);
        lip += top.value;
        G.noalias() += rho_ * (top.u * top.v.transpose());
        bool degenerate_here = top.gap <= kDegenerateGap;

        if (isotropic_scale_ >= 0.0) {
            sigmas[idx] = isotropic_scale_ * top.value;
            sigma_grad[idx] = isotropic_scale_ * (top.u * top.v.transpose());
        } else {
            const SingularTriplet st = operator_norm(M * scale_);
            sigmas[idx] = st.value;
            sigma_grad[idx] = st.u * (scale_ * st.v).transpose();
            degenerate_here = degenerate_here || st.gap <= kDegenerateGap;
        }
        sigma_sq += sigmas[idx] * sigmas[idx];
        risk_lip_grad[idx] = std::move(G);
        if (degenerate_here) ++degenerate;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    gibbs *= inv_m;
    lip *= inv_m;
    sigma_sq *= inv_m;

    const int n = sample_.size();
    const double kl = kl_gaussians(q, prior_);
    const double confidence = kl + std::log(static_cast<double>(n) / delta_);
    const double C = complexity_term(sigma_sq, kl, n, delta_);

    ObjectiveEvaluation out;
    auto& b = out.breakdown;
    b.gibbs_empirical_risk = gibbs;
    b.wasserstein_penalty = rho_ * lip;
    b.complexity = C;
    b.total_bound = b.gibbs_empirical_risk + b.wasserstein_penalty + b.complexity;
    b.kl = kl;
    b.expected_sigma_sq = sigma_sq;
    b.expected_lipschitz = lip;
    b.rho = rho_;
    b.delta = delta_;
    b.n = n;
    out.degenerate_count = degenerate;

    // C = sqrt(2 V A / (n-1)); at C = 0 take the zero subgradient.
    const double dC_dV = C > 0.0 ? confidence / (static_cast<double>(n - 1) * C) : 0.0;
    const double dC_dA = C > 0.0 ? sigma_sq / (static_cast<double>(n - 1) * C) : 0.0;

    out.grad_mean = Eigen::VectorXd::Zero(d);
    out.grad_log_sigma = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        Eigen::MatrixXd G = risk_lip_grad[idx];
        G.noalias() += (2.0 * dC_dV * sigmas[idx]) * sigma_grad[idx];
        const Eigen::VectorXd g_theta = inv_m * map_->contract(G);
        out.grad_mean += g_theta;
        out.grad_log_sigma += s * noise_.col(j).dot(g_theta);
    }
    const double prior_var = prior_.sigma * prior_.sigma;
    out.grad_mean += (dC_dA / prior_var) * q.mean;
    out.grad_log_sigma += dC_dA * static_cast<double>(d) * (s * s / prior_var - 1.0);
    return out;
}

}  // namespace drpac
