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
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fbh/config.hpp"
#include "fbh/model.hpp"
#include "fbh/units.hpp"

using namespace fbh;

namespace {

const std::vector<ErrorSource> kSources(kAllErrorSources.begin(), kAllErrorSources.end());

FidelityModel preset_model(int phases = 4) {
    FidelityModel m = preset("paper_tableS1").fidelity_model();
    m.mw_phases = phases;
    return m;
}

double row(const ErrorBudget &b, ErrorSource s) {
    for (const BudgetRow &r : b.rows) {
        if (r.source == s) {
            return r.mean;
        }
    }
    FAIL("missing row");
    return 0;
}

}  // namespace

TEST_CASE("error source names round trip") {
    for (ErrorSource s : kAllErrorSources) {
        CHECK(parse_error_source(error_source_name(s)) == s);
    }
    CHECK_THROWS_AS(parse_error_source("gravity"), Error);
}

TEST_CASE("dark-port phase minimizes the up-up curve of the phase scan") {
    Config c = preset("paper_tableS1");
    CqedSystem sys = c.spectroscopy_system();
    SidebandConfig sb = c.fidelity_model().sidebands;
    sb.phi_c = 0;
    double opt = dark_port_phase(sys, sb, 11);
    CHECK(opt >= 0);
    CHECK(opt < kTwoPi);
    std::vector<double> grid;
    for (int i = 0; i < 720; i++) {
        grid.push_back(kTwoPi * i / 720);
    }
    SpinConfig uu{Spin::up, Spin::up};
    auto rows = phase_scan(std::span(&uu, 1), grid, sb, sys, true, 11);
    double best = INFINITY, at = 0;
    for (const PhaseScanRow &r : rows) {
        if (r.mean_t2 < best) {
            best = r.mean_t2;
            at = r.phase;
        }
    }
    CHECK(std::abs(std::remainder(at - opt, kTwoPi)) <= kTwoPi / 720);
    std::array<double, 1> p = {opt};
    CHECK(phase_scan(std::span(&uu, 1), p, sb, sys, true, 11)[0].mean_t2 <= best * (1 + 1e-12));
}

TEST_CASE("transmission ordering at the optimal phase: odd parity highest, up-up lowest") {
    std::array<double, 4> r = transmission_ratios(preset_model());
    CHECK(r[0] == 1);
    CHECK(r[1] > r[3]);
    CHECK(r[2] > r[3]);
    CHECK(r[3] > 1);
}

TEST_CASE("prediction: eliminating every source leaves the contrast floor") {
    FidelityModel m = preset_model();
    Prediction all = predict(m, 0.3, Toggles::all_but_contrast());
    CHECK(all.fidelity > 0.98);
    CHECK(all.fidelity < 1);
    CHECK_NOTHROW(all.state.validate());
}

TEST_CASE("prediction: toggling two-photon events equals removing n_mean") {
    FidelityModel m = preset_model();
    FidelityModel zero = m;
    zero.n_mean = 0;
    CHECK(predict(m, 1.0, Toggles{}.with(ErrorSource::two_photon)).fidelity ==
          doctest::Approx(predict(zero, 1.0).fidelity).epsilon(1e-14));
}

TEST_CASE("error budget bookkeeping") {
    FidelityModel m = preset_model(6);
    ErrorBudget b = error_budget(m, kSources, 1);
    REQUIRE(b.rows.size() == 8);
    REQUIRE(b.fidelity_per_phase.size() == 6);
    double sum = 0;
    for (const BudgetRow &r : b.rows) {
        sum += r.mean;
        CHECK(r.min <= r.mean);
        CHECK(r.mean <= r.max);
    }
    CHECK(b.sum_of_rows == doctest::Approx(sum).epsilon(1e-15));
    CHECK(b.total_expected == doctest::Approx(1 - b.fidelity_mean).epsilon(1e-15));
    CHECK(row(b, ErrorSource::two_photon) == doctest::Approx(0.053).epsilon(0.25));
    // Negative marginals are reported, not clipped.
    bool negative = false;
    for (const BudgetRow &r : b.rows) {
        negative = negative || (r.source != ErrorSource::contrast && r.min < -1e-9);
    }
    CHECK(negative == !b.warnings.empty());
    std::ostringstream os;
    write_error_budget_csv(os, b);
    CHECK(os.str().find("two_photon,2-photon events,") != std::string::npos);
    CHECK(os.str().find("sum_of_rows,") != std::string::npos);
}

TEST_CASE("error budget does not depend on the worker count") {
    FidelityModel m = preset_model(4);
    ErrorBudget a = error_budget(m, kSources, 1), b = error_budget(m, kSources, 3);
    for (size_t i = 0; i < a.rows.size(); i++) {
        CHECK(a.rows[i].mean == b.rows[i].mean);
    }
    CHECK(a.fidelity_per_phase == b.fidelity_per_phase);
}

TEST_CASE("a negative marginal surfaces as a warning") {
    // The calibrated preset has a negative microwave marginal.
    ErrorBudget b = error_budget(preset_model(2), kSources, 1);
    CHECK(row(b, ErrorSource::microwave) < 0);
    CHECK_FALSE(b.warnings.empty());
    for (const BudgetRow &r : b.rows) {
        if (r.source != ErrorSource::contrast && r.min < -1e-9) {
            bool named = false;
            for (const std::string &w : b.warnings) {
                named = named || w.find(error_source_name(r.source)) != std::string::npos;
            }
            CHECK(named);
        }
    }
}

TEST_CASE("fidelity model validation") {
    FidelityModel m = preset_model();
    m.n_mean = -1;
    CHECK_THROWS_AS(m.validate(), Error);
    m = preset_model();
    m.mw_phases = 0;
    CHECK_THROWS_AS(m.validate(), Error);
}
