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

#include "fbh/herald.hpp"

#include <algorithm>
#include <cmath>

#include "fbh/csv.hpp"
#include "fbh/errors.hpp"
#include "fbh/parallel.hpp"
#include "fbh/quadrature.hpp"
#include "fbh/rng.hpp"

namespace fbh {

namespace {

bool in_unit(double x) { return x >= 0 && x <= 1; }

double poisson_cdf(int k, double mean) {
    if (k < 0) {
        return 0;
    }
    double term = std::exp(-mean);
    double sum = term;
    for (int i = 1; i <= k; i++) {
        term *= mean / i;
        sum += term;
    }
    return std::min(1.0, sum);
}

bool bernoulli(std::mt19937_64 &rng, double p) {
    if (p <= 0) {
        return false;
    }
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
}

SpinConfig apply_feedback(SpinConfig state, Spin seen_a, Spin seen_b, const ProtocolConfig &cfg) {
    if (seen_a != cfg.target_a) {
        state.a = flipped(state.a);
    }
    if (seen_b != cfg.target_b) {
        state.b = flipped(state.b);
    }
    return state;
}

CqedSystem ionized_system(CqedSystem s) {
    // An ionized emitter no longer couples to the cavity.
    s.a.g = 1e-12 * s.a.gamma;
    return s;
}

ReadoutChannel ionized_channel(ReadoutChannel ch) {
    ch.mean_bright = ch.mean_dark;
    return ch;
}

struct ExpectedEcho {
    int a;
    int b;
};

// Logical XX outcome of each qubit when an unheralded echo returns the prepared state.
ExpectedEcho expected_echo(SpinConfig target, const EchoTiming &timing) {
    EchoSequence seq{timing, Basis::XX};
    TwoQubitState mid = EchoRunner(seq, EchoNoise{}).before_probe(TwoQubitState::basis(target));
    std::array<double, 4> p = measure_correlations(mid, Basis::XX);
    return {p[0] + p[1] >= 0.5 ? 0 : 1, p[0] + p[2] >= 0.5 ? 0 : 1};
}

}  // namespace

void ProtocolConfig::validate() const {
    if (!in_unit(eta_wg) || !in_unit(eta_cav) || !in_unit(eta_det)) {
        domain_error("protocol: efficiencies must lie in [0, 1]");
    }
    if (!(n_mean >= 0) || !(herald_calibration >= 0)) {
        domain_error("protocol: n_mean and herald_calibration must be >= 0");
    }
    for (const ReadoutChannel *ch : {&readout_a, &readout_b}) {
        if (!(ch->mean_dark >= 0) || !(ch->mean_bright >= 0)) {
            domain_error("protocol: readout means must be >= 0");
        }
        if (!(ch->photons_per_flip > 0)) {
            domain_error("protocol: photons_per_flip must be > 0");
        }
    }
    if (readout_threshold < 0 || init_threshold < 0) {
        domain_error("protocol: thresholds must be >= 0");
    }
    if (!in_unit(spin_flip_per_cycle) || !in_unit(dark_count_prob) || !in_unit(ionization_prob)) {
        domain_error("protocol: probabilities must lie in [0, 1]");
    }
    if (trial_block < 1) {
        domain_error("protocol.trial_block must be >= 1");
    }
    if (!(rep_period > 0) || !(herald_window > 0)) {
        domain_error("protocol: rep_period and herald_window must be > 0");
    }
}

void ExperimentModel::validate() const {
    system.validate();
    sidebands.validate();
    timing.validate();
    protocol.validate();
    if (schedule.empty()) {
        domain_error("experiment: empty basis schedule");
    }
}

Spin classify(int counts, const ReadoutChannel &ch, int threshold) {
    return counts > threshold ? ch.bright : flipped(ch.bright);
}

ReadoutErrors readout_errors(const ReadoutChannel &ch, int threshold) {
    return {1 - poisson_cdf(threshold, ch.mean_dark), poisson_cdf(threshold, ch.mean_bright)};
}

int sample_counts(std::mt19937_64 &rng, const ReadoutChannel &ch, Spin s) {
    double mean = s == ch.bright ? ch.mean_bright : ch.mean_dark;
    if (!(mean > 0)) {
        return 0;
    }
    return std::poisson_distribution<int>(mean)(rng);
}

bool sample_backaction(std::mt19937_64 &rng, int counts, const ReadoutChannel &ch, const ProtocolConfig &cfg) {
    double eff = cfg.readout_efficiency();
    if (counts == 0 || !(eff > 0)) {
        return false;
    }
    double reflected = counts / eff;
    return bernoulli(rng, std::min(1.0, reflected / ch.photons_per_flip));
}

InitResult initialize_with_feedback(std::mt19937_64 &rng, SpinConfig state, const ProtocolConfig &cfg) {
    int ca = sample_counts(rng, cfg.readout_a, state.a);
    int cb = sample_counts(rng, cfg.readout_b, state.b);
    Spin seen_a = classify(ca, cfg.readout_a, cfg.init_threshold);
    Spin seen_b = classify(cb, cfg.readout_b, cfg.init_threshold);
    if (sample_backaction(rng, ca, cfg.readout_a, cfg)) {
        state.a = flipped(state.a);
    }
    if (sample_backaction(rng, cb, cfg.readout_b, cfg)) {
        state.b = flipped(state.b);
    }
    state = apply_feedback(state, seen_a, seen_b, cfg);
    return {state, state.a == cfg.target_a && state.b == cfg.target_b};
}

double herald_mean(double success_weight, const ProtocolConfig &cfg) {
    return cfg.herald_calibration * success_weight * cfg.n_mean * cfg.eta();
}

HeraldSample herald_sample(std::mt19937_64 &rng, double success_weight, const ProtocolConfig &cfg) {
    if (!(success_weight >= 0)) {
        domain_error("herald_sample: success_weight must be >= 0");
    }
    double mean = herald_mean(success_weight, cfg);
    int n = mean > 0 ? std::poisson_distribution<int>(mean)(rng) : 0;
    bool dark = bernoulli(rng, cfg.dark_count_prob);
    return {n > 0 || dark, n};
}

double herald_probability(const ExperimentModel &model, int order) {
    const ProtocolConfig &cfg = model.protocol;
    EchoSequence seq{model.timing, Basis::ZZ};
    TwoQubitState mid = EchoRunner(seq, model.noise).before_probe(TwoQubitState::basis({cfg.target_a, cfg.target_b}));
    std::array<double, 4> pop = mid.populations();
    SidebandConfig sb = model.sidebands;
    sb.set_interferometer_phase(model.interferometer_phase);
    DiffusionGrid grid = diffusion_grid(model.system.a.sigma, model.system.b.sigma, order);
    double p = 0;
    for (size_t n = 0; n < grid.size(); n++) {
        TransmissionMap t = transmission_map(sb, model.system, grid.offset_a[n], grid.offset_b[n]);
        double w = 0;
        for (int k = 0; k < 4; k++) {
            w += pop[k] * std::norm(t[k]);
        }
        p += grid.weight[n] * (1 - std::exp(-herald_mean(w, cfg)));
    }
    return 1 - (1 - p) * (1 - cfg.dark_count_prob);
}

Dataset run_experiment(uint64_t seed, uint64_t n_trials, const ExperimentModel &model, int threads) {
    model.validate();
    const ProtocolConfig &cfg = model.protocol;
    uint64_t block = uint64_t(cfg.trial_block);
    uint64_t n_blocks = (n_trials + block - 1) / block;
    SidebandConfig sb = model.sidebands;
    sb.set_interferometer_phase(model.interferometer_phase);
    CqedSystem ion_sys = ionized_system(model.system);
    ReadoutChannel ion_a = ionized_channel(cfg.readout_a);
    std::array<EchoRunner, 3> runners = {EchoRunner({model.timing, Basis::XX}, model.noise),
                                         EchoRunner({model.timing, Basis::YY}, model.noise),
                                         EchoRunner({model.timing, Basis::ZZ}, model.noise)};
    Dataset out;
    out.seed = seed;
    out.target = {cfg.target_a, cfg.target_b};
    out.trials.resize(n_trials);
    parallel_for(n_blocks, threads, [&](size_t bi) {
        std::mt19937_64 init_rng = substream(seed, StreamTag::readout, bi);
        std::uniform_int_distribution<int> coin(0, 1);
        SpinConfig state{coin(init_rng) ? Spin::up : Spin::down, coin(init_rng) ? Spin::up : Spin::down};
        InitResult ir = initialize_with_feedback(init_rng, state, cfg);
        state = ir.state;
        bool ionized = false;
        uint64_t end = std::min(n_trials, (bi + 1) * block);
        for (uint64_t i = bi * block; i < end; i++) {
            std::mt19937_64 rng = substream(seed, StreamTag::experiment, i);
            std::uniform_real_distribution<double> unif(0, 1);
            TrialOutcome &t = out.trials[i];
            t.trial = i;
            t.basis = model.schedule[i % model.schedule.size()];
            t.init_ok = state.a == cfg.target_a && state.b == cfg.target_b;
            if (!ionized && bernoulli(rng, cfg.ionization_prob)) {
                ionized = true;
            }
            t.ionized = ionized;
            const CqedSystem &sys = ionized ? ion_sys : model.system;
            const EchoRunner &runner = runners[static_cast<int>(t.basis)];

            TwoQubitState rho = runner.before_probe(TwoQubitState::basis(state));
            double da = 0, db = 0;
            if (model.sample_diffusion) {
                std::normal_distribution<double> gauss(0, 1);
                da = sys.a.sigma * gauss(rng);
                db = sys.b.sigma * gauss(rng);
            }
            TransmissionMap tm = transmission_map(sb, sys, da, db);
            std::array<double, 4> pop = rho.populations();
            double w = 0;
            for (int k = 0; k < 4; k++) {
                w += pop[k] * std::norm(tm[k]);
            }
            HeraldSample hs = herald_sample(rng, w, cfg);
            t.heralded = hs.detected;
            if (hs.detected && w > 0) {
                rho = two_photon_dephasing(heralded_projection(rho, tm).state, cfg.n_mean);
            } else if (!hs.detected) {
                TransmissionMap vac;
                for (int k = 0; k < 4; k++) {
                    vac[k] = std::exp(-0.5 * herald_mean(std::norm(tm[k]), cfg));
                }
                rho = heralded_projection(rho, vac).state;
            }
            rho = runner.after_probe(rho);

            std::array<double, 4> fin = rho.populations();
            double u = unif(rng) * (fin[0] + fin[1] + fin[2] + fin[3]);
            int k = 0;
            while (k < 3 && u >= fin[k]) {
                u -= fin[k];
                k++;
            }
            SpinConfig measured = SpinConfig::from_index(k);
            const ReadoutChannel &cha = ionized ? ion_a : cfg.readout_a;
            t.counts_a = sample_counts(rng, cha, measured.a);
            t.counts_b = sample_counts(rng, cfg.readout_b, measured.b);
            t.readout_a = classify(t.counts_a, cfg.readout_a, cfg.readout_threshold);
            t.readout_b = classify(t.counts_b, cfg.readout_b, cfg.readout_threshold);
            if (sample_backaction(rng, t.counts_a, cha, cfg)) {
                measured.a = flipped(measured.a);
            }
            if (sample_backaction(rng, t.counts_b, cfg.readout_b, cfg)) {
                measured.b = flipped(measured.b);
            }
            state = apply_feedback(measured, classify(t.counts_a, cfg.readout_a, cfg.init_threshold),
                                   classify(t.counts_b, cfg.readout_b, cfg.init_threshold), cfg);
        }
    });
    return out;
}

int logical_outcome(const TrialOutcome &t, const EchoTiming &timing) {
    std::array<int, 4> labels = outcome_labels({timing, t.basis});
    return labels[SpinConfig{t.readout_a, t.readout_b}.index()];
}

CorrelationData heralded_correlations(const Dataset &data, const EchoTiming &timing) {
    std::array<std::array<long, 4>, 3> counts{};
    std::array<std::array<int, 4>, 3> labels;
    for (Basis b : {Basis::XX, Basis::YY, Basis::ZZ}) {
        labels[static_cast<int>(b)] = outcome_labels({timing, b});
    }
    for (const TrialOutcome &t : data.trials) {
        if (t.heralded) {
            int b = static_cast<int>(t.basis);
            counts[b][labels[b][SpinConfig{t.readout_a, t.readout_b}.index()]]++;
        }
    }
    CorrelationData c;
    for (Basis b : {Basis::XX, Basis::YY, Basis::ZZ}) {
        c.set_counts(b, counts[static_cast<int>(b)]);
    }
    return c;
}

Dataset postselect(const Dataset &data, const EchoTiming &timing, size_t window_n, double max_infidelity_a,
                   double max_infidelity_b) {
    std::vector<const TrialOutcome *> ref;
    for (const TrialOutcome &t : data.trials) {
        if (!t.heralded && t.basis == Basis::XX) {
            ref.push_back(&t);
        }
    }
    if (window_n == 0 || window_n > ref.size()) {
        domain_error("postselect: window of " + std::to_string(window_n) + " exceeds the " +
                     std::to_string(ref.size()) + " unheralded XX trials");
    }
    std::sort(ref.begin(), ref.end(), [](auto *x, auto *y) { return x->trial < y->trial; });
    std::array<int, 4> labels = outcome_labels({timing, Basis::XX});
    ExpectedEcho expect = expected_echo(data.target, timing);
    std::vector<char> ok_a(ref.size()), ok_b(ref.size());
    for (size_t j = 0; j < ref.size(); j++) {
        int l = labels[SpinConfig{ref[j]->readout_a, ref[j]->readout_b}.index()];
        ok_a[j] = (l / 2) == expect.a;
        ok_b[j] = (l % 2) == expect.b;
    }
    Dataset out;
    out.seed = data.seed;
    out.config_hash = data.config_hash;
    out.target = data.target;
    for (const TrialOutcome &t : data.trials) {
        if (!t.heralded) {
            out.trials.push_back(t);
            continue;
        }
        size_t hi = std::lower_bound(ref.begin(), ref.end(), t.trial,
                                     [](auto *x, uint64_t v) { return x->trial < v; }) -
                    ref.begin();
        size_t lo = hi;
        long good_a = 0, good_b = 0;
        for (size_t taken = 0; taken < window_n; taken++) {
            bool take_left;
            if (lo == 0) {
                take_left = false;
            } else if (hi == ref.size()) {
                take_left = true;
            } else {
                take_left = t.trial - ref[lo - 1]->trial <= ref[hi]->trial - t.trial;
            }
            size_t j = take_left ? --lo : hi++;
            good_a += ok_a[j];
            good_b += ok_b[j];
        }
        double inf_a = 1 - double(good_a) / double(window_n);
        double inf_b = 1 - double(good_b) / double(window_n);
        if (inf_a <= max_infidelity_a && inf_b <= max_infidelity_b) {
            out.trials.push_back(t);
        }
    }
    return out;
}

void write_dataset_csv(std::ostream &out, const Dataset &data) {
    out << "trial,basis,heralded,counts_a,counts_b,readout_a,readout_b,init_ok\n";
    for (const TrialOutcome &t : data.trials) {
        out << t.trial << ',' << basis_name(t.basis) << ',' << int(t.heralded) << ',' << t.counts_a << ','
            << t.counts_b << ',' << (t.readout_a == Spin::up ? "up" : "down") << ','
            << (t.readout_b == Spin::up ? "up" : "down") << ',' << int(t.init_ok) << '\n';
    }
}

std::vector<JumpSample> quantum_jump_trace(uint64_t seed, const ExperimentModel &model, const JumpTraceConfig &jc) {
    model.validate();
    if (!(jc.bin > 0) || jc.n_bins < 1 || !(jc.photon_rate >= 0)) {
        domain_error("jump trace: need bin > 0, n_bins >= 1 and photon_rate >= 0");
    }
    const ProtocolConfig &cfg = model.protocol;
    SidebandConfig sb = model.sidebands;
    sb.set_interferometer_phase(model.interferometer_phase);
    TransmissionMap tm = transmission_map(sb, model.system);
    double photons = jc.photon_rate * jc.bin;
    double p_flip = 1 - std::exp(-photons * cfg.spin_flip_per_cycle);
    std::mt19937_64 rng = substream(seed, StreamTag::jumps, 0);
    std::uniform_int_distribution<int> coin(0, 1);
    SpinConfig state{coin(rng) ? Spin::up : Spin::down, coin(rng) ? Spin::up : Spin::down};
    std::vector<JumpSample> trace;
    trace.reserve(jc.n_bins);
    for (int i = 0; i < jc.n_bins; i++) {
        double mean = cfg.herald_calibration * std::norm(tm[state.index()]) * photons * cfg.eta();
        int counts = mean > 0 ? std::poisson_distribution<int>(mean)(rng) : 0;
        trace.push_back({i * jc.bin, state, counts});
        if (bernoulli(rng, p_flip)) {
            state.a = flipped(state.a);
        }
        if (bernoulli(rng, p_flip)) {
            state.b = flipped(state.b);
        }
    }
    return trace;
}

void write_jump_trace_csv(std::ostream &out, const std::vector<JumpSample> &trace) {
    out << "time_s,state,parity,counts\n";
    for (const JumpSample &s : trace) {
        out << format_double(s.time) << ',' << s.state.label() << ',' << (s.state.odd_parity() ? "odd" : "even")
            << ',' << s.counts << '\n';
    }
}

}  // namespace fbh
