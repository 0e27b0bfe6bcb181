// Copyright 2026 The fbh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / ("fbh_cli_" + std::to_string(::getpid()));

int run_cli(const std::string &args) {
    std::string cmd = std::string(FBH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string out_dir(const char *name) { return (kRoot / name).string(); }

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path &p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(cell);
        }
        rows.push_back(row);
    }
    return rows;
}

struct Cleanup {
    ~Cleanup() { fs::remove_all(kRoot); }
} cleanup;

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("--out " + out_dir("e1") + " --set cavity.kappa_w=9 phase-scan") == 2);
    CHECK(fs::exists(kRoot / "e1" / "error.json"));
    CHECK(slurp(kRoot / "e1" / "error.json").find("cavity.kappa_w") != std::string::npos);
    CHECK(run_cli("--out " + out_dir("e2") + " --preset nope phase-scan") == 2);
    CHECK(run_cli("--out " + out_dir("e3") + " simulate") == 2);
    CHECK(run_cli("--out " + out_dir("e4") + " fit-scan --scan /nonexistent.csv") == 2);
    // A postselection window longer than the run is a numerical failure.
    CHECK(run_cli("--out " + out_dir("e5") + " --seed 1 --set simulate.trials=200 simulate") == 3);
    CHECK(run_cli("--out " + out_dir("e1") + " --set phase_scan.points=13 phase-scan") == 0);
    CHECK_FALSE(fs::exists(kRoot / "e1" / "error.json"));
}

TEST_CASE("global options after the subcommand") {
    REQUIRE(run_cli("phase-scan --out " + out_dir("late") + " --set phase_scan.points=13") == 0);
    std::ifstream in(kRoot / "late" / "config.ini");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("points = 13") != std::string::npos);
}

TEST_CASE("error budget two-photon row") {
    REQUIRE(run_cli("--out " + out_dir("budget") + " --set model.mw_phases=4 error-budget") == 0);
    auto rows = read_csv(kRoot / "budget" / "error_budget.csv");
    REQUIRE(rows.size() > 3);
    CHECK(rows[0][0] == "source");
    bool found = false;
    for (const auto &r : rows) {
        if (r[0] == "two_photon") {
            found = true;
            CHECK(r[1] == "2-photon events");
            CHECK(std::stod(r[2]) == doctest::Approx(0.053).epsilon(0.15));
        }
    }
    CHECK(found);
    std::string manifest = slurp(kRoot / "budget" / "manifest.json");
    CHECK(manifest.find("\"config_hash\"") != std::string::npos);
    CHECK(manifest.find("error_budget.csv") != std::string::npos);
}

TEST_CASE("phase scan minimum of up-up sits at the reported optimal phase") {
    REQUIRE(run_cli("--out " + out_dir("phase") + " --set phase_scan.points=721 phase-scan") == 0);
    auto rows = read_csv(kRoot / "phase" / "phase_scan.csv");
    REQUIRE(rows[0] == std::vector<std::string>{"phase_rad", "state", "mean_T2", "var_T2"});
    double best = 0, best_t = INFINITY;
    std::map<std::string, int> states;
    for (size_t i = 1; i < rows.size(); i++) {
        states[rows[i][1]]++;
        if (rows[i][1] == "up_up" && std::stod(rows[i][2]) < best_t) {
            best_t = std::stod(rows[i][2]);
            best = std::stod(rows[i][0]);
        }
    }
    CHECK(states.size() == 4);
    CHECK(states["up_up"] == 721);
    std::string manifest = slurp(kRoot / "phase" / "manifest.json");
    size_t k = manifest.find("\"optimal_phase_rad\"");
    REQUIRE(k != std::string::npos);
    double reported = std::stod(manifest.substr(manifest.find(':', k) + 1));
    CHECK(std::abs(reported - best) <= 2 * M_PI / 720);
}

TEST_CASE("same seed gives identical outputs") {
    std::string common = " --seed 9 --set simulate.trials=4000 simulate";
    REQUIRE(run_cli("--out " + out_dir("s1") + common) == 0);
    REQUIRE(run_cli("--out " + out_dir("s2") + " --threads 3" + common) == 0);
    for (const char *f : {"trials.csv", "correlations_simulated.csv", "config.ini"}) {
        INFO(f);
        CHECK(slurp(kRoot / "s1" / f) == slurp(kRoot / "s2" / f));
        CHECK(slurp(kRoot / "s1" / f).size() > 0);
    }
    REQUIRE(run_cli("--out " + out_dir("s3") + " --seed 10 --set simulate.trials=4000 simulate") == 0);
    CHECK(slurp(kRoot / "s1" / "trials.csv") != slurp(kRoot / "s3" / "trials.csv"));
}

TEST_CASE("config file and overrides reach the dumped config") {
    fs::create_directories(kRoot);
    {
        std::ofstream cfg(kRoot / "in.ini");
        cfg << "[interferometer]\nphi_c = 1.2504\n";
    }
    REQUIRE(run_cli("--out " + out_dir("cfg") + " --preset paper_tableS1 --config " + (kRoot / "in.ini").string() +
                    " --set cavity.kappa_l=5.5GHz detuning-design") == 0);
    std::string dumped = slurp(kRoot / "cfg" / "config.ini");
    CHECK(dumped.find("phi_c = 1.2504 rad") != std::string::npos);
    CHECK(dumped.find("kappa_l = 5.5 GHz") != std::string::npos);
    auto rows = read_csv(kRoot / "cfg" / "detuning_design.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "a");
}
