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

#ifndef DRPAC_EXPERIMENT_HPP
#define DRPAC_EXPERIMENT_HPP

#include "drpac/certificates.hpp"
#include "drpac/disturbance.hpp"
#include "drpac/lti_model.hpp"
#include "drpac/optimizer.hpp"
#include "drpac/pac_bayes.hpp"
#include "drpac/sls.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace drpac {

inline constexpr const char* kToolVersion = "0.3.0";

/// Error raised for malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    Eigen::MatrixXd A, B;
    int horizon = 10;
    Eigen::MatrixXd Q, R;

    enum class Noise { gaussian, bounded } noise = Noise::gaussian;
    Eigen::VectorXd noise_mean;  ///< empty means zero
    Eigen::MatrixXd noise_cov;   ///< Gaussian
    double noise_radius = 0.0;   ///< bounded

    double prior_sigma = 1.0;
    double delta = 0.05;
    std::vector<double> rho_list{0.0, 0.08};
    std::vector<int> n_list{16, 32, 64, 128, 256};
    int mc_samples = 24;
    double init_sigma = 0.1;
    OptimizerConfig optimizer;

    double shift_radius = 0.08;
    std::optional<Eigen::VectorXd> shift_direction;  ///< empty means adversarial

    int n_test = 10000;
    int test_posterior_samples = 24;

    std::uint64_t seed = 1;
    int seed_count = 10;
    int workers = 1;
    std::string output_dir = "out";

    nlohmann::json source;  ///< configuration as parsed, after overrides
};

/// Parses and validates a configuration document. Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Built-in double-integrator configuration (T = 10, Sigma_w = 0.02^2 I, delta = 0.05, ...).
nlohmann::json default_config_json();

/// Sets `value` (JSON text, or a bare string) at a '/'- or '.'-separated key path.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// FNV-1a of the canonical (sorted-key) dump, excluding output_dir and workers.
std::string config_hash(const nlohmann::json& doc);

/// Everything derived from the plant, weights and disturbance model.
/// Not copyable: objectives keep a pointer to `map`.
struct Synthesis {
    Synthesis(LtiPlant plant, CostWeights weights, DisturbanceModel model);
    Synthesis(const Synthesis&) = delete;
    Synthesis& operator=(const Synthesis&) = delete;

    LtiPlant plant;
    CostWeights weights;
    LiftedConstraints constraints;
    SlsBasis basis;
    WeightedMapBasis map;
    DisturbanceModel model;
    double baseline_residual = 0.0;
};

std::unique_ptr<Synthesis> synthesize(const ExperimentConfig& config);

/// Independent seeds for one (n, seed) cell; vanilla and robust runs share them.
struct CellSeeds {
    std::uint64_t train;
    std::uint64_t monte_carlo;
    std::uint64_t test;
};
CellSeeds cell_seeds(std::uint64_t seed, int n);

std::string method_label(double rho);

struct CellResult {
    int n = 0;
    double rho = 0.0;
    std::uint64_t seed = 0;
    FitResult fit;
    TestReport nominal;
    TestReport shifted;
};

/// Fits the posterior for (n, rho, seed) and, when `with_test` is set, evaluates
/// it on nominal and shifted deployment distributions.
CellResult run_cell(const Synthesis& syn, const ExperimentConfig& config, int n, double rho, std::uint64_t seed,
                    bool with_test = true);

/// Recomputes the certificate for a stored posterior. With `fresh_data_seed`
/// the training sample is redrawn from that seed instead of the cell's own.
CertificateBreakdown certify(const Synthesis& syn, const ExperimentConfig& config, const GaussianPosterior& q,
                             int n, double rho, std::uint64_t seed,
                             std::optional<std::uint64_t> fresh_data_seed = std::nullopt);

/// Runs every (n, rho, seed) cell with up to `config.workers` threads. Results are
/// ordered by n, then rho, then seed regardless of scheduling.
std::vector<CellResult> run_sweep(const Synthesis& syn, const ExperimentConfig& config);

// CSV output (RFC 4180, '.' decimal, shortest round-trip doubles).

std::string format_double(double v);

inline constexpr const char* kSweepHeader =
    "n,rho,gibbs_risk,w1_penalty,complexity,total_bound,test_risk_nominal,test_risk_shifted,seed,"
    "method,rho_shift,test_se_nominal,test_se_shifted,kl,iterations,termination,config_hash";

std::string sweep_row(const CellResult& cell, double rho_shift, const std::string& hash);
void write_sweep_csv(std::ostream& os, const std::vector<CellResult>& cells, double rho_shift,
                     const std::string& hash);

inline constexpr const char* kTraceHeader =
    "iteration,objective,grad_norm,gibbs_risk,w1_penalty,complexity,step,degenerate_count";
void write_trace_csv(std::ostream& os, const OptimizationTrace& trace);

inline constexpr const char* kCertificateHeader =
    "config_hash,seed,n,rho,delta,method,gibbs_risk,w1_penalty,complexity,total_bound,kl,expected_sigma_sq,"
    "expected_lipschitz";
std::string certificate_row(const CertificateBreakdown& b, std::uint64_t seed, const std::string& hash);

struct StoredPosterior {
    std::string config_hash;
    std::uint64_t seed = 0;
    int n = 0;
    double rho = 0.0;
    GaussianPosterior posterior;
};

/// Header `config_hash,seed,n,rho,log_sigma,mu_0,...,mu_{d-1}` and one data row.
void write_posterior_csv(std::ostream& os, const StoredPosterior& p);
StoredPosterior read_posterior_csv(std::istream& is);

std::string guarantee_sentence(const CertificateBreakdown& b);

}  // namespace drpac

#endif  // DRPAC_EXPERIMENT_HPP
