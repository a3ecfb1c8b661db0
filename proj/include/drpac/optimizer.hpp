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

#ifndef DRPAC_OPTIMIZER_HPP
#define DRPAC_OPTIMIZER_HPP

#include "drpac/pac_bayes.hpp"
#include "drpac/sls.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drpac {

struct OptimizerConfig {
    int max_iterations = 150;
    double gradient_tolerance = 1e-6;  ///< on the infinity norm
    double armijo = 1e-4;              ///< sufficient-decrease constant
    double backtrack = 0.5;
    int max_backtracks = 40;
    int memory = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class Termination { gradient_tolerance, max_iterations, line_search_failure };

std::string to_string(Termination t);

struct TraceRecord {
    int iteration = 0;
    double objective = 0.0;
    double grad_norm = 0.0;  ///< infinity norm
    double gibbs_risk = 0.0;
    double w1_penalty = 0.0;
    double complexity = 0.0;
    double step = 0.0;
    int degenerate_count = 0;
};

struct OptimizationTrace {
    TraceRecord initial;
    std::vector<TraceRecord> iterations;  ///< one per accepted step
    Termination reason = Termination::max_iterations;
    int degenerate_total = 0;
};

struct FitResult {
    GaussianPosterior posterior;
    ObjectiveEvaluation evaluation;  ///< at `posterior`
    OptimizationTrace trace;
};

using PosteriorObjective = std::function<ObjectiveEvaluation(const GaussianPosterior&)>;

/// Limited-memory quasi-Newton descent with backtracking Armijo line search over
/// (mean, log_sigma). Returns the best accepted iterate.
FitResult fit_posterior(const PosteriorObjective& objective, const GaussianPosterior& init,
                        const OptimizerConfig& config);

FitResult fit_posterior(const RobustObjective& objective, const GaussianPosterior& init,
                        const OptimizerConfig& config);

enum class InitStrategy { zeros };

/// Posterior centred on the open-loop baseline (theta = 0) with std `init_sigma`.
GaussianPosterior initialize_posterior(const SlsBasis& basis, InitStrategy strategy, double init_sigma);

/// Posterior with an explicit mean; the mean must have the basis dimension.
GaussianPosterior initialize_posterior(const SlsBasis& basis, const Eigen::VectorXd& mean, double init_sigma);

namespace detail {

/// Two-loop recursion over stored (s, y) pairs; returns -H g.
inline Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::deque<Eigen::VectorXd>& S,
                                       const std::deque<Eigen::VectorXd>& Y) {
    Eigen::VectorXd q = g;
    const std::size_t k = S.size();
    std::vector<double> alpha(k), rho(k);
    for (std::size_t i = k; i-- > 0;) {
        rho[i] = 1.0 / Y[i].dot(S[i]);
        alpha[i] = rho[i] * S[i].dot(q);
        q -= alpha[i] * Y[i];
    }
    if (k > 0) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t i = 0; i < k; ++i) {
        const double beta = rho[i] * Y[i].dot(q);
        q += (alpha[i] - beta) * S[i];
    }
    return -q;
}

}  // namespace detail

struct LbfgsOutcome {
    Eigen::VectorXd x;
    Termination reason = Termination::max_iterations;
    int iterations = 0;
};

/**
 * @brief Generic minimizer behind fit_posterior.
 *
 * `eval(x)` returns an arbitrary result; `value_of` and `gradient_of` project it to the
 * scalar objective and its gradient. `on_accept(iteration, x, result, step)`
 * is called after every accepted step. Every accepted step strictly decreases the
 * objective, so the last accepted iterate is also the best one.
 */
template <class Eval, class Value, class Gradient, class OnAccept>
LbfgsOutcome lbfgs_minimize(Eval&& eval, Value&& value_of, Gradient&& gradient_of, Eigen::VectorXd x,
                            const OptimizerConfig& config, OnAccept&& on_accept) {
    config.validate();
    auto current = eval(x);
    double f = value_of(current);
    Eigen::VectorXd g = gradient_of(current);
    if (!std::isfinite(f) || !g.allFinite()) {
        throw std::runtime_error("lbfgs: objective or gradient is not finite at the initial point");
    }

    std::deque<Eigen::VectorXd> S, Y;
    LbfgsOutcome out;
    out.reason = Termination::max_iterations;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance) {
            out.reason = Termination::gradient_tolerance;
            break;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Eigen::VectorXd direction;
            double step = 1.0;
            if (attempt == 0 && !S.empty()) {
                direction = detail::lbfgs_direction(g, S, Y);
            }
            if (direction.size() == 0 || !(direction.dot(g) < 0.0) || !direction.allFinite()) {
                // Steepest descent with a unit-length first trial.
                S.clear();
                Y.clear();
                direction = -g;
                step = 1.0 / g.norm();
            }
            const double slope = direction.dot(g);
            for (int bt = 0; bt <= config.max_backtracks; ++bt, step *= config.backtrack) {
                Eigen::VectorXd trial_x = x + step * direction;
                auto trial = eval(trial_x);
                const double trial_f = value_of(trial);
                if (!std::isfinite(trial_f) || trial_f > f + config.armijo * step * slope || !(trial_f < f)) {
                    continue;
                }
                Eigen::VectorXd trial_g = gradient_of(trial);
                if (!trial_g.allFinite()) continue;

                Eigen::VectorXd s = trial_x - x;
                Eigen::VectorXd y = trial_g - g;
                if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
                    S.push_back(std::move(s));
                    Y.push_back(std::move(y));
                    if (static_cast<int>(S.size()) > config.memory) {
                        S.pop_front();
                        Y.pop_front();
                    }
                }
                x = std::move(trial_x);
                f = trial_f;
                g = std::move(trial_g);
                current = std::move(trial);
                on_accept(iter, x, current, step);
                out.iterations = iter;
                accepted = true;
                break;
            }
            if (S.empty()) break;  // steepest descent already failed
        }
        if (!accepted) {
            out.reason = Termination::line_search_failure;
            break;
        }
        if (iter == config.max_iterations) {
            out.reason = g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance ? Termination::gradient_tolerance
                                                                                 : Termination::max_iterations;
        }
    }
    out.x = std::move(x);
    return out;
}

}  // namespace drpac

#endif  // DRPAC_OPTIMIZER_HPP
