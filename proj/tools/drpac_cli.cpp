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

// Command-line driver: synthesize | optimize | sweep | certify | evaluate.
//
//   drpac_cli synthesize [--config cfg.json]
//   drpac_cli optimize   [--config cfg.json] --n 64 --rho 0.08 [--seed 3]
//   drpac_cli sweep      [--config cfg.json] --seed 1 [--seeds 10] [--workers 4]
//   drpac_cli certify    [--config cfg.json] --posterior out/posterior_64_0.08.csv [--fresh-seed 99]
//   drpac_cli evaluate   [--config cfg.json] --posterior out/posterior_64_0.08.csv
//
// Without --config the built-in double-integrator configuration is used. Any
// key can be overridden with --set path=value (e.g. --set optimizer.max_iterations=50).
// A manifest.json written by a previous run is accepted as --config.

#include "drpac/experiment.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::optional<int> workers;
};

json load_document(const CommonOptions& opts) {
    json doc = drpac::default_config_json();
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw drpac::ConfigError("cannot open config file '" + opts.config_path + "'");
        try {
            doc = json::parse(in, nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw drpac::ConfigError("config file '" + opts.config_path + "' is not valid JSON");
        }
        if (doc.contains("manifest_version") && doc.contains("config")) doc = doc.at("config");
    }
    for (const auto& o : opts.overrides) drpac::apply_override(doc, o);
    if (!opts.out_dir.empty()) doc["output_dir"] = opts.out_dir;
    if (opts.workers) doc["workers"] = *opts.workers;
    return doc;
}

std::string rho_tag(double rho) { return drpac::format_double(rho); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

void write_manifest(const drpac::ExperimentConfig& cfg, const std::string& command, const json& runs,
                    const std::vector<std::string>& files, double seconds) {
    json manifest;
    manifest["manifest_version"] = 1;
    manifest["tool_version"] = drpac::kToolVersion;
    manifest["command"] = command;
    manifest["config_hash"] = drpac::config_hash(cfg.source);
    manifest["config"] = cfg.source;
    manifest["runs"] = runs;
    manifest["files"] = files;
    manifest["wall_clock_seconds"] = seconds;
    write_text(fs::path(cfg.output_dir) / "manifest.json", manifest.dump(2) + "\n");
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_synthesize(const drpac::ExperimentConfig& cfg) {
    const auto syn = drpac::synthesize(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd theta(syn->basis.dim());
    for (auto& t : theta) t = normal(rng);
    const double residual = drpac::achievability_residual(syn->constraints, drpac::realize(syn->basis, theta));
    std::cout << "nx=" << syn->plant.nx() << " nu=" << syn->plant.nu() << " T=" << syn->plant.horizon() << '\n'
              << "d=" << syn->basis.dim() << '\n'
              << "disturbance_dim=" << syn->plant.disturbance_dim() << '\n'
              << "input_dim=" << syn->plant.input_dim() << '\n'
              << "weighted_map=" << syn->map.rows() << "x" << syn->map.cols() << '\n'
              << "baseline_residual=" << drpac::format_double(syn->baseline_residual) << '\n'
              << "random_theta_residual=" << drpac::format_double(residual) << '\n'
              << "baseline_lipschitz=" << drpac::format_double(drpac::operator_norm(syn->map.M0()).value) << '\n';
    return 0;
}

int cmd_optimize(drpac::ExperimentConfig cfg, int n, double rho, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    const auto syn = drpac::synthesize(cfg);
    const std::string hash = drpac::config_hash(cfg.source);
    const drpac::CellResult cell = drpac::run_cell(*syn, cfg, n, rho, seed);

    fs::create_directories(cfg.output_dir);
    const std::string tag = std::to_string(n) + "_" + rho_tag(rho);
    const fs::path dir(cfg.output_dir);
    std::vector<std::string> files;

    std::ostringstream trace;
    drpac::write_trace_csv(trace, cell.fit.trace);
    write_text(dir / ("trace_" + tag + ".csv"), trace.str());
    files.push_back("trace_" + tag + ".csv");

    std::ostringstream post;
    drpac::write_posterior_csv(post, {hash, seed, n, rho, cell.fit.posterior});
    write_text(dir / ("posterior_" + tag + ".csv"), post.str());
    files.push_back("posterior_" + tag + ".csv");

    const std::string cert = std::string(drpac::kCertificateHeader) + "\r\n" +
                             drpac::certificate_row(cell.fit.evaluation.breakdown, seed, hash) + "\r\n";
    write_text(dir / ("certificate_" + tag + ".csv"), cert);
    files.push_back("certificate_" + tag + ".csv");

    json runs = json::array({{{"n", n}, {"rho", rho}, {"seed", seed}, {"method", drpac::method_label(rho)},
                              {"termination", drpac::to_string(cell.fit.trace.reason)},
                              {"iterations", cell.fit.trace.iterations.size()}}});
    write_manifest(cfg, "optimize", runs, files, elapsed(start));

    std::cout << "method=" << drpac::method_label(rho) << " termination=" << drpac::to_string(cell.fit.trace.reason)
              << " iterations=" << cell.fit.trace.iterations.size() << '\n'
              << drpac::kCertificateHeader << '\n'
              << drpac::certificate_row(cell.fit.evaluation.breakdown, seed, hash) << '\n'
              << "test_risk_nominal=" << drpac::format_double(cell.nominal.mean_risk)
              << " test_risk_shifted=" << drpac::format_double(cell.shifted.mean_risk) << '\n';
    return 0;
}

int cmd_sweep(const drpac::ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const auto syn = drpac::synthesize(cfg);
    const std::string hash = drpac::config_hash(cfg.source);
    const auto cells = drpac::run_sweep(*syn, cfg);

    fs::create_directories(cfg.output_dir);
    std::ostringstream csv;
    drpac::write_sweep_csv(csv, cells, cfg.shift_radius, hash);
    write_text(fs::path(cfg.output_dir) / "sweep.csv", csv.str());

    json runs = json::array();
    for (const auto& c : cells) {
        runs.push_back({{"n", c.n}, {"rho", c.rho}, {"seed", c.seed}, {"method", drpac::method_label(c.rho)},
                        {"termination", drpac::to_string(c.fit.trace.reason)}});
    }
    write_manifest(cfg, "sweep", runs, {"sweep.csv"}, elapsed(start));
    std::cout << "wrote " << cells.size() << " rows to " << (fs::path(cfg.output_dir) / "sweep.csv").string() << '\n';
    return 0;
}

drpac::StoredPosterior load_posterior(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open posterior file '" + path + "'");
    return drpac::read_posterior_csv(in);
}

int cmd_certify(const drpac::ExperimentConfig& cfg, const std::string& posterior_path,
                std::optional<std::uint64_t> fresh_seed) {
    const auto syn = drpac::synthesize(cfg);
    const auto stored = load_posterior(posterior_path);
    const std::string hash = drpac::config_hash(cfg.source);
    if (stored.config_hash != hash) {
        std::cerr << "warning: posterior was produced under config " << stored.config_hash << ", current config is "
                  << hash << '\n';
    }
    const auto b = drpac::certify(*syn, cfg, stored.posterior, stored.n, stored.rho, stored.seed, fresh_seed);
    std::cout << drpac::kCertificateHeader << '\n' << drpac::certificate_row(b, stored.seed, hash) << '\n'
              << drpac::guarantee_sentence(b) << '\n';
    return 0;
}

int cmd_evaluate(const drpac::ExperimentConfig& cfg, const std::string& posterior_path) {
    const auto syn = drpac::synthesize(cfg);
    const auto stored = load_posterior(posterior_path);
    if (stored.posterior.dim() != syn->basis.dim()) {
        throw std::runtime_error("posterior has d=" + std::to_string(stored.posterior.dim()) + " but the basis has d=" +
                                 std::to_string(syn->basis.dim()));
    }
    const auto seeds = drpac::cell_seeds(stored.seed, stored.n);
    const auto nominal =
        drpac::test_risk(syn->map, stored.posterior, syn->model, cfg.n_test, cfg.test_posterior_samples, seeds.test);
    const auto shifted_model = drpac::shifted_model(syn->model, drpac::ShiftSpec{cfg.shift_radius, cfg.shift_direction},
                                                    syn->map, stored.posterior.mean);
    const auto shifted = drpac::test_risk(syn->map, stored.posterior, shifted_model, cfg.n_test,
                                          cfg.test_posterior_samples, seeds.test);
    const std::string method = drpac::method_label(stored.rho);
    std::cout << "n,rho,rho_shift,method,mean_test_risk,standard_error,n_test\n";
    std::cout << stored.n << ',' << drpac::format_double(stored.rho) << ",0," << method << ','
              << drpac::format_double(nominal.mean_risk) << ',' << drpac::format_double(nominal.standard_error) << ','
              << nominal.n_test << '\n';
    std::cout << stored.n << ',' << drpac::format_double(stored.rho) << ',' << drpac::format_double(cfg.shift_radius)
              << ',' << method << ',' << drpac::format_double(shifted.mean_risk) << ','
              << drpac::format_double(shifted.standard_error) << ',' << shifted.n_test << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust PAC-Bayes controller synthesis for finite-horizon LTI systems"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("-c,--config", common.config_path, "JSON config file (or a previous manifest.json)");
        sub->add_option("--set", common.overrides, "Override a config key: path=value");
        sub->add_option("-o,--out", common.out_dir, "Output directory");
        sub->add_option("--workers", common.workers, "Worker threads");
    };

    auto* synth = app.add_subcommand("synthesize", "Build the SLS parameterization and print its dimensions");
    add_common(synth);

    int n = 0;
    double rho = 0.0;
    std::optional<std::uint64_t> seed;
    auto* optimize = app.add_subcommand("optimize", "Fit the posterior for one (n, rho) cell");
    add_common(optimize);
    optimize->add_option("--n", n, "Training sample size")->required()->check(CLI::Range(2, 1 << 30));
    optimize->add_option("--rho", rho, "Wasserstein radius")->required()->check(CLI::NonNegativeNumber);
    optimize->add_option("--seed", seed, "Run seed (defaults to the config seed)");

    int seed_count = 0;
    auto* sweep = app.add_subcommand("sweep", "Run every (n, rho, seed) cell and write sweep.csv");
    add_common(sweep);
    sweep->add_option("--seed", seed, "Base seed")->required();
    sweep->add_option("--seeds", seed_count, "Seeds per cell");

    std::string posterior_path;
    std::optional<std::uint64_t> fresh_seed;
    auto* certify = app.add_subcommand("certify", "Recompute the certificate of a stored posterior");
    add_common(certify);
    certify->add_option("--posterior", posterior_path, "posterior_<n>_<rho>.csv")->required();
    certify->add_option("--fresh-seed", fresh_seed, "Redraw the training sample from this seed");

    auto* evaluate = app.add_subcommand("evaluate", "Estimate nominal and shifted test risk of a stored posterior");
    add_common(evaluate);
    evaluate->add_option("--posterior", posterior_path, "posterior_<n>_<rho>.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        json doc = load_document(common);
        if (seed) doc["seed"] = *seed;
        if (seed_count > 0) doc["seeds"] = seed_count;
        const drpac::ExperimentConfig cfg = drpac::parse_config(doc);

        if (*synth) return cmd_synthesize(cfg);
        if (*optimize) return cmd_optimize(cfg, n, rho, cfg.seed);
        if (*sweep) return cmd_sweep(cfg);
        if (*certify) return cmd_certify(cfg, posterior_path, fresh_seed);
        if (*evaluate) return cmd_evaluate(cfg, posterior_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
