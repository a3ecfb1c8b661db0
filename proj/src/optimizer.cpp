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

#include "drpac/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drpac {

void OptimizerConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("optimizer: max_iterations must be >= 1");
    if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("optimizer: gradient_tolerance must be > 0");
    if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("optimizer: armijo must lie in (0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("optimizer: backtrack must lie in (0, 1)");
    if (max_backtracks < 1) throw std::invalid_argument("optimizer: max_backtracks must be >= 1");
    if (memory < 1) throw std::invalid_argument("optimizer: memory must be >= 1");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::gradient_tolerance: return "gradient_tolerance";
        case Termination::max_iterations: return "max_iterations";
        case Termination::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

namespace {

Eigen::VectorXd pack(const GaussianPosterior& q) {
    Eigen::VectorXd x(q.dim() + 1);
    x.head(q.dim()) = q.mean;
    x(q.dim()) = q.log_sigma;
    return x;
}

GaussianPosterior unpack(const Eigen::VectorXd& x) {
    GaussianPosterior q;
    q.mean = x.head(x.size() - 1);
    q.log_sigma = x(x.size() - 1);
    return q;
}

Eigen::VectorXd packed_gradient(const ObjectiveEvaluation& e) {
    Eigen::VectorXd g(e.grad_mean.size() + 1);
    g.head(e.grad_mean.size()) = e.grad_mean;
    g(e.grad_mean.size()) = e.grad_log_sigma;
    return g;
}

TraceRecord record(int iteration, const ObjectiveEvaluation& e, double step) {
    TraceRecord r;
    r.iteration = iteration;
    r.objective = e.value();
    r.grad_norm = packed_gradient(e).lpNorm<Eigen::Infinity>();
    r.gibbs_risk = e.breakdown.gibbs_empirical_risk;
    r.w1_penalty = e.breakdown.wasserstein_penalty;
    r.complexity = e.breakdown.complexity;
    r.step = step;
    r.degenerate_count = e.degenerate_count;
    return r;
}

void require_finite(const ObjectiveEvaluation& e) {
    const auto& b = e.breakdown;
    const std::pair<const char*, double> terms[] = {
        {"gibbs_empirical_risk", b.gibbs_empirical_risk}, {"wasserstein_penalty", b.wasserstein_penalty},
        {"complexity", b.complexity},                     {"kl", b.kl},
        {"expected_sigma_sq", b.expected_sigma_sq},
    };
    for (const auto& [name, value] : terms) {
        if (!std::isfinite(value)) {
            throw std::runtime_error(std::string("fit_posterior: term '") + name + "' is not finite at the initial posterior");
        }
    }
    if (!e.grad_mean.allFinite()) throw std::runtime_error("fit_posterior: gradient wrt mean is not finite at the initial posterior");
    if (!std::isfinite(e.grad_log_sigma)) throw std::runtime_error("fit_posterior: gradient wrt log_sigma is not finite at the initial posterior");
}

}  // namespace

FitResult fit_posterior(const PosteriorObjective& objective, const GaussianPosterior& init,
                        const OptimizerConfig& config) {
    config.validate();
    if (init.dim() < 1) throw std::invalid_argument("fit_posterior: empty posterior mean");

    FitResult result;
    result.evaluation = objective(init);
    require_finite(result.evaluation);
    result.trace.initial = record(0, result.evaluation, 0.0);
    result.trace.degenerate_total = result.evaluation.degenerate_count;
    result.posterior = init;

    auto eval = [&](const Eigen::VectorXd& x) {
        ObjectiveEvaluation e = objective(unpack(x));
        result.trace.degenerate_total += e.degenerate_count;
        return e;
    };
    auto value_of = [](const ObjectiveEvaluation& e) { return e.value(); };
    auto on_accept = [&](int iter, const Eigen::VectorXd& x, const ObjectiveEvaluation& e, double step) {
        result.trace.iterations.push_back(record(iter, e, step));
        result.posterior = unpack(x);
        result.evaluation = e;
    };

    const LbfgsOutcome outcome = lbfgs_minimize(eval, value_of, packed_gradient, pack(init), config, on_accept);
    result.trace.reason = outcome.reason;
    return result;
}

FitResult fit_posterior(const RobustObjective& objective, const GaussianPosterior& init,
                        const OptimizerConfig& config) {
    return fit_posterior([&objective](const GaussianPosterior& q) { return objective.evaluate(q); }, init, config);
}

GaussianPosterior initialize_posterior(const SlsBasis& basis, InitStrategy strategy, double init_sigma) {
    switch (strategy) {
        case InitStrategy::zeros: return initialize_posterior(basis, Eigen::VectorXd::Zero(basis.dim()), init_sigma);
    }
    throw std::invalid_argument("initialize_posterior: unknown strategy");
}

GaussianPosterior initialize_posterior(const SlsBasis& basis, const Eigen::VectorXd& mean, double init_sigma) {
    if (mean.size() != basis.dim()) {
        throw std::invalid_argument("initialize_posterior: mean has d=" + std::to_string(mean.size()) +
                                    ", basis has d=" + std::to_string(basis.dim()));
    }
    if (!(init_sigma > 0.0) || !std::isfinite(init_sigma)) {
        throw std::invalid_argument("initialize_posterior: init_sigma must be positive and finite");
    }
    GaussianPosterior q;
    q.mean = mean;
    q.log_sigma = std::log(init_sigma);
    return q;
}

}  // namespace drpac
