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

#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = 0;
    std::string output;
};

fs::path scratch() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("drpac_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run(const std::string& args) {
    const fs::path log = scratch() / "stdout.txt";
    const std::string command = std::string("\"") + DRPAC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int raw = std::system(command.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes a small configuration so every command finishes quickly.
fs::path small_config() {
    const fs::path p = scratch() / "small.json";
    std::ofstream(p) << R"({
      "plant": {"A": [[1.0, 0.1], [0.0, 1.0]], "B": [[0.0], [1.0]], "horizon": 10},
      "weights": {"Q": [[1.0, 0.0], [0.0, 0.1]], "R": [[0.01]]},
      "disturbance": {"kind": "gaussian", "std": 0.02},
      "rho": [0.0, 0.08],
      "n": [8, 16],
      "mc_samples": 4,
      "optimizer": {"max_iterations": 10},
      "test": {"n_test": 200, "posterior_samples": 2},
      "seeds": 2
    })";
    return p;
}

}  // namespace

TEST_CASE("synthesize prints the parameterization size") {
    const Run r = run("synthesize");
    CHECK(r.status == 0);
    CHECK(r.output.find("d=110") != std::string::npos);
}

TEST_CASE("optimize, certify and evaluate a stored posterior") {
    const fs::path out = scratch() / "opt";
    const std::string cfg = "-c \"" + small_config().string() + "\"";
    const Run opt = run("optimize " + cfg + " --n 16 --rho 0.08 --seed 3 -o \"" + out.string() + "\"");
    REQUIRE(opt.status == 0);
    for (const char* name : {"trace_16_0.08.csv", "posterior_16_0.08.csv", "certificate_16_0.08.csv", "manifest.json"}) {
        CAPTURE(name);
        CHECK(fs::exists(out / name));
    }
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["command"] == "optimize");
    CHECK(manifest["config"]["n"][1] == 16);

    const std::string posterior = "--posterior \"" + (out / "posterior_16_0.08.csv").string() + "\"";
    const Run cert = run("certify -c \"" + (out / "manifest.json").string() + "\" " + posterior);
    CHECK(cert.status == 0);
    // The recomputed certificate row equals the one written by optimize.
    const std::string written = slurp(out / "certificate_16_0.08.csv");
    const std::string row = written.substr(written.find("\r\n") + 2, written.rfind("\r\n") - written.find("\r\n") - 2);
    CHECK(cert.output.find(row) != std::string::npos);

    const Run eval = run("evaluate " + cfg + " " + posterior);
    CHECK(eval.status == 0);
    CHECK(eval.output.find("mean_test_risk") != std::string::npos);

    SUBCASE("config mismatch is reported") {
        const Run other = run("certify " + cfg + " --set delta=0.1 " + posterior);
        CHECK(other.status == 0);
        CHECK(other.output.find("warning:") != std::string::npos);
    }
    SUBCASE("missing posterior file") {
        const Run missing = run("certify " + cfg + " --posterior \"" + (out / "nope.csv").string() + "\"");
        CHECK(missing.status == 1);
        CHECK(missing.output.find("error:") != std::string::npos);
    }
}

TEST_CASE("sweep writes a reproducible sweep.csv") {
    const std::string cfg = "-c \"" + small_config().string() + "\"";
    const fs::path a = scratch() / "sweep_a";
    const fs::path b = scratch() / "sweep_b";
    REQUIRE(run("sweep " + cfg + " --seed 5 -o \"" + a.string() + "\"").status == 0);
    REQUIRE(run("sweep " + cfg + " --seed 5 --workers 2 -o \"" + b.string() + "\"").status == 0);
    const std::string csv = slurp(a / "sweep.csv");
    CHECK(csv == slurp(b / "sweep.csv"));
    CHECK(csv.rfind("n,rho,gibbs_risk,w1_penalty,complexity,total_bound,test_risk_nominal,test_risk_shifted,", 0) == 0);
    std::size_t rows = 0;
    for (std::size_t pos = csv.find("\r\n"); pos != std::string::npos; pos = csv.find("\r\n", pos + 2)) ++rows;
    CHECK(rows == 1 + 2 * 2 * 2);
}

TEST_CASE("usage and configuration errors exit with status 1") {
    CHECK(run("optimize --rho 0.08").status != 0);
    CHECK(run("bogus").status != 0);
    const Run missing = run("synthesize -c /nonexistent/config.json");
    CHECK(missing.status == 1);
    CHECK(missing.output.find("error:") != std::string::npos);
    const Run unknown = run("synthesize --set plant.typo=1");
    CHECK(unknown.status == 1);
    CHECK(unknown.output.find("typo") != std::string::npos);
}
