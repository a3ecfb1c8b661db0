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

#include "drpac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace drpac {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
        throw ConfigError(where + ": expected a nonempty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError(where + ": row " + std::to_string(r) + " does not have " + std::to_string(cols) +
                              " entries");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw ConfigError(where + ": non-numeric entry");
            M(r, c) = v.get<double>();
        }
    }
    return M;
}

Eigen::VectorXd read_vector(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty numeric array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(where + ": non-numeric entry");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

template <class T>
T read_number(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    }
    return v.get<T>();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string("posterior file: bad ") + what + " value '" + s + "'");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& s, const char* what) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string("posterior file: bad ") + what + " value '" + s + "'");
    }
    return v;
}

}  // namespace

json default_config_json() {
    return json::parse(R"({
      "plant": {"A": [[1.0, 0.1], [0.0, 1.0]], "B": [[0.0], [1.0]], "horizon": 10},
      "weights": {"Q": [[1.0, 0.0], [0.0, 0.1]], "R": [[0.01]]},
      "disturbance": {"kind": "gaussian", "std": 0.02},
      "prior_sigma": 1.0,
      "delta": 0.05,
      "rho": [0.0, 0.08],
      "n": [16, 32, 64, 128, 256],
      "mc_samples": 24,
      "optimizer": {"max_iterations": 150, "gradient_tolerance": 1e-6, "armijo": 1e-4, "backtrack": 0.5,
                    "max_backtracks": 40, "memory": 10, "init_sigma": 0.1},
      "shift": {"radius": 0.08, "direction": "adversarial"},
      "test": {"n_test": 10000, "posterior_samples": 24},
      "seed": 1,
      "seeds": 10,
      "workers": 1,
      "output_dir": "out"
    })");
}

ExperimentConfig parse_config(const json& doc) {
    check_keys(doc, "config",
               {"plant", "weights", "disturbance", "prior_sigma", "delta", "rho", "n", "mc_samples", "optimizer",
                "shift", "test", "seed", "seeds", "workers", "output_dir"});
    ExperimentConfig c;
    c.source = doc;

    if (!doc.contains("plant")) throw ConfigError("config: missing 'plant'");
    const auto& plant = doc.at("plant");
    check_keys(plant, "plant", {"A", "B", "horizon"});
    if (!plant.contains("A") || !plant.contains("B")) throw ConfigError("plant: 'A' and 'B' are required");
    c.A = read_matrix(plant.at("A"), "plant.A");
    c.B = read_matrix(plant.at("B"), "plant.B");
    c.horizon = read_number<int>(plant, "horizon", c.horizon, "plant");
    if (c.A.rows() != c.A.cols()) throw ConfigError("plant.A: must be square");
    if (c.B.rows() != c.A.rows()) {
        throw ConfigError("plant.B: has " + std::to_string(c.B.rows()) + " rows, A is " + std::to_string(c.A.rows()) +
                          "x" + std::to_string(c.A.cols()));
    }
    if (c.horizon < 1) throw ConfigError("plant.horizon: must be >= 1");

    if (!doc.contains("weights")) throw ConfigError("config: missing 'weights'");
    const auto& weights = doc.at("weights");
    check_keys(weights, "weights", {"Q", "R"});
    if (!weights.contains("Q") || !weights.contains("R")) throw ConfigError("weights: 'Q' and 'R' are required");
    c.Q = read_matrix(weights.at("Q"), "weights.Q");
    c.R = read_matrix(weights.at("R"), "weights.R");
    if (c.Q.rows() != c.A.rows() || c.Q.cols() != c.A.rows()) throw ConfigError("weights.Q: must be nx x nx");
    if (c.R.rows() != c.B.cols() || c.R.cols() != c.B.cols()) throw ConfigError("weights.R: must be nu x nu");

    const int N = (c.horizon + 1) * static_cast<int>(c.A.rows());
    if (!doc.contains("disturbance")) throw ConfigError("config: missing 'disturbance'");
    const auto& dist = doc.at("disturbance");
    check_keys(dist, "disturbance", {"kind", "std", "cov", "mean", "radius"});
    const std::string kind = dist.value("kind", std::string("gaussian"));
    if (kind == "gaussian") {
        c.noise = ExperimentConfig::Noise::gaussian;
        if (dist.contains("cov") == dist.contains("std")) {
            throw ConfigError("disturbance: give exactly one of 'std' or 'cov'");
        }
        if (dist.contains("std")) {
            const double s = read_number<double>(dist, "std", 0.0, "disturbance");
            if (s < 0.0) throw ConfigError("disturbance.std: must be >= 0");
            c.noise_cov = s * s * Eigen::MatrixXd::Identity(N, N);
        } else {
            c.noise_cov = read_matrix(dist.at("cov"), "disturbance.cov");
            if (c.noise_cov.rows() != N || c.noise_cov.cols() != N) {
                throw ConfigError("disturbance.cov: must be " + std::to_string(N) + "x" + std::to_string(N));
            }
        }
        if (dist.contains("mean")) {
            const auto& m = dist.at("mean");
            c.noise_mean = m.is_number() ? Eigen::VectorXd::Constant(N, m.get<double>())
                                         : read_vector(m, "disturbance.mean");
            if (c.noise_mean.size() != N) throw ConfigError("disturbance.mean: must have " + std::to_string(N) + " entries");
        }
    } else if (kind == "bounded") {
        c.noise = ExperimentConfig::Noise::bounded;
        if (dist.contains("std") || dist.contains("cov") || dist.contains("mean")) {
            throw ConfigError("disturbance: bounded model takes only 'radius'");
        }
        c.noise_radius = read_number<double>(dist, "radius", 0.0, "disturbance");
        if (!(c.noise_radius > 0.0)) throw ConfigError("disturbance.radius: must be > 0");
    } else {
        throw ConfigError("disturbance.kind: expected 'gaussian' or 'bounded', got '" + kind + "'");
    }

    c.prior_sigma = read_number<double>(doc, "prior_sigma", c.prior_sigma, "config");
    if (!(c.prior_sigma > 0.0)) throw ConfigError("prior_sigma: must be > 0");
    c.delta = read_number<double>(doc, "delta", c.delta, "config");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta: must lie in (0, 1)");

    if (doc.contains("rho")) {
        const auto& r = doc.at("rho");
        c.rho_list.clear();
        if (r.is_number()) {
            c.rho_list.push_back(r.get<double>());
        } else {
            const Eigen::VectorXd v = read_vector(r, "rho");
            c.rho_list.assign(v.data(), v.data() + v.size());
        }
        for (double rho : c.rho_list) {
            if (!(rho >= 0.0)) throw ConfigError("rho: values must be >= 0");
        }
    }
    if (doc.contains("n")) {
        const auto& n = doc.at("n");
        c.n_list.clear();
        const auto push = [&](const json& v) {
            if (!v.is_number_integer() || v.get<int>() < 2) throw ConfigError("n: values must be integers >= 2");
            c.n_list.push_back(v.get<int>());
        };
        if (n.is_array()) {
            if (n.empty()) throw ConfigError("n: list is empty");
            for (const auto& v : n) push(v);
        } else {
            push(n);
        }
    }
    c.mc_samples = read_number<int>(doc, "mc_samples", c.mc_samples, "config");
    if (c.mc_samples < 1) throw ConfigError("mc_samples: must be >= 1");

    if (doc.contains("optimizer")) {
        const auto& o = doc.at("optimizer");
        check_keys(o, "optimizer",
                   {"max_iterations", "gradient_tolerance", "armijo", "backtrack", "max_backtracks", "memory",
                    "init_sigma"});
        c.optimizer.max_iterations = read_number<int>(o, "max_iterations", c.optimizer.max_iterations, "optimizer");
        c.optimizer.gradient_tolerance =
            read_number<double>(o, "gradient_tolerance", c.optimizer.gradient_tolerance, "optimizer");
        c.optimizer.armijo = read_number<double>(o, "armijo", c.optimizer.armijo, "optimizer");
        c.optimizer.backtrack = read_number<double>(o, "backtrack", c.optimizer.backtrack, "optimizer");
        c.optimizer.max_backtracks = read_number<int>(o, "max_backtracks", c.optimizer.max_backtracks, "optimizer");
        c.optimizer.memory = read_number<int>(o, "memory", c.optimizer.memory, "optimizer");
        c.init_sigma = read_number<double>(o, "init_sigma", c.init_sigma, "optimizer");
    }
    try {
        c.optimizer.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(c.init_sigma > 0.0)) throw ConfigError("optimizer.init_sigma: must be > 0");

    if (doc.contains("shift")) {
        const auto& s = doc.at("shift");
        check_keys(s, "shift", {"radius", "direction"});
        c.shift_radius = read_number<double>(s, "radius", c.shift_radius, "shift");
        if (!(c.shift_radius >= 0.0)) throw ConfigError("shift.radius: must be >= 0");
        if (s.contains("direction")) {
            const auto& d = s.at("direction");
            if (d.is_string()) {
                if (d.get<std::string>() != "adversarial") {
                    throw ConfigError("shift.direction: expected 'adversarial' or a unit vector");
                }
            } else {
                Eigen::VectorXd v = read_vector(d, "shift.direction");
                if (v.size() != N) throw ConfigError("shift.direction: must have " + std::to_string(N) + " entries");
                if (std::abs(v.norm() - 1.0) > 1e-9) throw ConfigError("shift.direction: must be a unit vector");
                c.shift_direction = std::move(v);
            }
        }
    }
    if (c.noise == ExperimentConfig::Noise::bounded && c.shift_radius > 0.0) {
        throw ConfigError("shift.radius: mean-translation shifts need a Gaussian disturbance; set it to 0");
    }
    if (doc.contains("test")) {
        const auto& t = doc.at("test");
        check_keys(t, "test", {"n_test", "posterior_samples"});
        c.n_test = read_number<int>(t, "n_test", c.n_test, "test");
        c.test_posterior_samples = read_number<int>(t, "posterior_samples", c.test_posterior_samples, "test");
        if (c.n_test < 1 || c.test_posterior_samples < 1) throw ConfigError("test: counts must be >= 1");
    }

    c.seed = read_number<std::uint64_t>(doc, "seed", c.seed, "config");
    c.optimizer.seed = c.seed;
    c.seed_count = read_number<int>(doc, "seeds", c.seed_count, "config");
    if (c.seed_count < 1) throw ConfigError("seeds: must be >= 1");
    c.workers = read_number<int>(doc, "workers", c.workers, "config");
    if (c.workers < 1) throw ConfigError("workers: must be >= 1");
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) throw ConfigError("output_dir: expected a string");
        c.output_dir = doc.at("output_dir").get<std::string>();
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "': expected key=value");
    }
    std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    std::replace(key.begin(), key.end(), '.', '/');
    if (key.front() != '/') key.insert(key.begin(), '/');
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    doc[json::json_pointer(key)] = std::move(value);
}

std::string config_hash(const json& doc) {
    json canonical = doc;
    if (canonical.is_object()) {
        canonical.erase("output_dir");
        canonical.erase("workers");
    }
    const std::string text = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Synthesis::Synthesis(LtiPlant p, CostWeights w, DisturbanceModel m)
    : plant(std::move(p)), weights(std::move(w)), constraints(build_constraints(plant)),
      basis(causal_basis(plant, constraints)), map(build_weighted_basis(basis, weights)), model(std::move(m)) {
    baseline_residual = achievability_residual(constraints, basis.baseline());
}

std::unique_ptr<Synthesis> synthesize(const ExperimentConfig& config) {
    LtiPlant plant(config.A, config.B, config.horizon);
    CostWeights weights(config.Q, config.R);
    const int N = plant.disturbance_dim();
    DisturbanceModel model = config.noise == ExperimentConfig::Noise::bounded
                                 ? DisturbanceModel::bounded(N, config.noise_radius)
                                 : DisturbanceModel::gaussian(
                                       config.noise_mean.size() ? config.noise_mean : Eigen::VectorXd::Zero(N),
                                       config.noise_cov);
    return std::make_unique<Synthesis>(std::move(plant), std::move(weights), std::move(model));
}

CellSeeds cell_seeds(std::uint64_t seed, int n) {
    const std::uint64_t base = splitmix64(seed);
    const std::uint64_t cell = splitmix64(base ^ static_cast<std::uint64_t>(n));
    return {splitmix64(cell ^ 0x01), splitmix64(cell ^ 0x02), splitmix64(base ^ 0x03)};
}

std::string method_label(double rho) { return rho > 0.0 ? "robust" : "vanilla"; }

namespace {

RobustObjective make_objective(const Synthesis& syn, const ExperimentConfig& config, int n, double rho,
                               const CellSeeds& seeds, std::uint64_t data_seed) {
    return RobustObjective(syn.map, GaussianPrior(config.prior_sigma), sample_training(syn.model, n, data_seed),
                           syn.model, rho, config.delta, MonteCarloPlan{config.mc_samples, seeds.monte_carlo});
}

}  // namespace

CellResult run_cell(const Synthesis& syn, const ExperimentConfig& config, int n, double rho, std::uint64_t seed,
                    bool with_test) {
    const CellSeeds seeds = cell_seeds(seed, n);
    const RobustObjective objective = make_objective(syn, config, n, rho, seeds, seeds.train);
    OptimizerConfig opt = config.optimizer;
    opt.seed = seed;

    CellResult cell;
    cell.n = n;
    cell.rho = rho;
    cell.seed = seed;
    cell.fit = fit_posterior(objective, initialize_posterior(syn.basis, InitStrategy::zeros, config.init_sigma), opt);
    if (with_test) {
        const auto& q = cell.fit.posterior;
        cell.nominal = test_risk(syn.map, q, syn.model, config.n_test, config.test_posterior_samples, seeds.test);
        if (config.shift_radius > 0.0) {
            const DisturbanceModel shifted =
                shifted_model(syn.model, ShiftSpec{config.shift_radius, config.shift_direction}, syn.map, q.mean);
            cell.shifted = test_risk(syn.map, q, shifted, config.n_test, config.test_posterior_samples, seeds.test);
        } else {
            cell.shifted = cell.nominal;
        }
    }
    return cell;
}

CertificateBreakdown certify(const Synthesis& syn, const ExperimentConfig& config, const GaussianPosterior& q, int n,
                             double rho, std::uint64_t seed, std::optional<std::uint64_t> fresh_data_seed) {
    if (q.dim() != syn.basis.dim()) {
        throw std::invalid_argument("certify: posterior has d=" + std::to_string(q.dim()) + " but the basis has d=" +
                                    std::to_string(syn.basis.dim()));
    }
    const CellSeeds seeds = cell_seeds(seed, n);
    const std::uint64_t data_seed = fresh_data_seed ? cell_seeds(*fresh_data_seed, n).train : seeds.train;
    return make_objective(syn, config, n, rho, seeds, data_seed).evaluate(q).breakdown;
}

std::vector<CellResult> run_sweep(const Synthesis& syn, const ExperimentConfig& config) {
    struct Task {
        int n;
        double rho;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (int n : config.n_list) {
        for (double rho : config.rho_list) {
            for (int s = 0; s < config.seed_count; ++s) {
                tasks.push_back({n, rho, config.seed + static_cast<std::uint64_t>(s)});
            }
        }
    }
    std::vector<CellResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                results[i] = run_cell(syn, config, tasks[i].n, tasks[i].rho, tasks[i].seed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const auto count = static_cast<std::size_t>(std::max(1, config.workers));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(count, tasks.size()); ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string sweep_row(const CellResult& c, double rho_shift, const std::string& hash) {
    const auto& b = c.fit.evaluation.breakdown;
    std::ostringstream os;
    os << c.n << ',' << format_double(c.rho) << ',' << format_double(b.gibbs_empirical_risk) << ','
       << format_double(b.wasserstein_penalty) << ',' << format_double(b.complexity) << ','
       << format_double(b.total_bound) << ',' << format_double(c.nominal.mean_risk) << ','
       << format_double(c.shifted.mean_risk) << ',' << c.seed << ',' << method_label(c.rho) << ','
       << format_double(rho_shift) << ',' << format_double(c.nominal.standard_error) << ','
       << format_double(c.shifted.standard_error) << ',' << format_double(b.kl) << ','
       << c.fit.trace.iterations.size() << ',' << to_string(c.fit.trace.reason) << ',' << csv_field(hash);
    return os.str();
}

void write_sweep_csv(std::ostream& os, const std::vector<CellResult>& cells, double rho_shift,
                     const std::string& hash) {
    os << kSweepHeader << "\r\n";
    for (const auto& c : cells) os << sweep_row(c, rho_shift, hash) << "\r\n";
}

void write_trace_csv(std::ostream& os, const OptimizationTrace& trace) {
    os << kTraceHeader << "\r\n";
    auto row = [&os](const TraceRecord& r) {
        os << r.iteration << ',' << format_double(r.objective) << ',' << format_double(r.grad_norm) << ','
           << format_double(r.gibbs_risk) << ',' << format_double(r.w1_penalty) << ','
           << format_double(r.complexity) << ',' << format_double(r.step) << ',' << r.degenerate_count << "\r\n";
    };
    row(trace.initial);
    for (const auto& r : trace.iterations) row(r);
}

std::string certificate_row(const CertificateBreakdown& b, std::uint64_t seed, const std::string& hash) {
    std::ostringstream os;
    os << csv_field(hash) << ',' << seed << ',' << b.n << ',' << format_double(b.rho) << ','
       << format_double(b.delta) << ',' << method_label(b.rho) << ',' << format_double(b.gibbs_empirical_risk)
       << ',' << format_double(b.wasserstein_penalty) << ',' << format_double(b.complexity) << ','
       << format_double(b.total_bound) << ',' << format_double(b.kl) << ',' << format_double(b.expected_sigma_sq)
       << ',' << format_double(b.expected_lipschitz);
    return os.str();
}

void write_posterior_csv(std::ostream& os, const StoredPosterior& p) {
    os << "config_hash,seed,n,rho,log_sigma";
    for (int i = 0; i < p.posterior.dim(); ++i) os << ",mu_" << i;
    os << "\r\n"
       << csv_field(p.config_hash) << ',' << p.seed << ',' << p.n << ',' << format_double(p.rho) << ','
       << format_double(p.posterior.log_sigma);
    for (int i = 0; i < p.posterior.dim(); ++i) os << ',' << format_double(p.posterior.mean(i));
    os << "\r\n";
}

StoredPosterior read_posterior_csv(std::istream& is) {
    std::string header_line, data_line;
    if (!std::getline(is, header_line) || !std::getline(is, data_line)) {
        throw std::runtime_error("posterior file: expected a header row and a data row");
    }
    const auto header = split_csv_line(header_line);
    const auto data = split_csv_line(data_line);
    if (header.size() < 6 || header[0] != "config_hash" || header[4] != "log_sigma") {
        throw std::runtime_error("posterior file: unexpected header");
    }
    if (data.size() != header.size()) {
        throw std::runtime_error("posterior file: data row has " + std::to_string(data.size()) +
                                 " fields, header has " + std::to_string(header.size()));
    }
    StoredPosterior p;
    p.config_hash = data[0];
    p.seed = parse_int<std::uint64_t>(data[1], "seed");
    p.n = parse_int<int>(data[2], "n");
    p.rho = parse_double(data[3], "rho");
    p.posterior.log_sigma = parse_double(data[4], "log_sigma");
    const auto d = static_cast<Eigen::Index>(data.size() - 5);
    p.posterior.mean.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (header[static_cast<std::size_t>(i) + 5] != "mu_" + std::to_string(i)) {
            throw std::runtime_error("posterior file: column " + std::to_string(i + 5) + " should be mu_" +
                                     std::to_string(i));
        }
        p.posterior.mean(i) = parse_double(data[static_cast<std::size_t>(i) + 5], "mu");
    }
    return p;
}

std::string guarantee_sentence(const CertificateBreakdown& b) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "With probability at least " << (1.0 - b.delta) * 100.0 << "% over the draw of the n=" << b.n
       << " training trajectories, the posterior-averaged worst-case expected cost over every deployment "
          "distribution within 1-Wasserstein distance "
       << b.rho << " of the training distribution is at most " << b.total_bound << " (empirical Gibbs risk "
       << b.gibbs_empirical_risk << " + Wasserstein penalty " << b.wasserstein_penalty << " + complexity "
       << b.complexity << ").";
    return os.str();
}

}  // namespace drpac
