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

#include "fbh/spectra_fit.hpp"

#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/NonLinearOptimization>

#include "fbh/csv.hpp"
#include "fbh/quadrature.hpp"
#include "fbh/units.hpp"

namespace fbh {

void ScanModel::validate() const {
    system.validate();
    if (!(scale > 0)) {
        domain_error("scan.scale must be > 0");
    }
    if (!(init_fidelity_a >= 0 && init_fidelity_a <= 1 && init_fidelity_b >= 0 && init_fidelity_b <= 1)) {
        domain_error("scan.init_fidelity must lie in [0, 1]");
    }
    if (!(modulation.period > 0)) {
        domain_error("scan.modulation period must be > 0");
    }
    if (order < 1) {
        domain_error("scan.order must be >= 1");
    }
}

std::vector<double> simulate_scan(const ScanModel &model, std::span<const double> freqs, Preparation prep) {
    if (freqs.empty()) {
        domain_error("simulate_scan: empty frequency grid");
    }
    for (size_t i = 1; i < freqs.size(); i++) {
        if (!(freqs[i] >= freqs[i - 1])) {
            domain_error("simulate_scan: frequency grid must be sorted");
        }
    }
    std::array<double, 4> mix{};
    for (SpinConfig s : kAllSpinConfigs) {
        if (prep.unpolarized) {
            mix[s.index()] = 0.25;
        } else {
            double pa = s.a == prep.state.a ? model.init_fidelity_a : 1 - model.init_fidelity_a;
            double pb = s.b == prep.state.b ? model.init_fidelity_b : 1 - model.init_fidelity_b;
            mix[s.index()] = pa * pb;
        }
    }
    const CqedSystem &sys = model.system;
    DiffusionGrid grid = diffusion_grid(sys.a.sigma, sys.b.sigma, model.order);
    std::vector<double> out(freqs.size());
    for (size_t i = 0; i < freqs.size(); i++) {
        double w = freqs[i];
        double r2 = 0;
        for (SpinConfig s : kAllSpinConfigs) {
            double m = mix[s.index()];
            if (m == 0) {
                continue;
            }
            for (size_t n = 0; n < grid.size(); n++) {
                r2 += m * grid.weight[n] * std::norm(sys.reflection(w, s, grid.offset_a[n], grid.offset_b[n]));
            }
        }
        const PowerModulation &pm = model.modulation;
        double mod = 1 + pm.amplitude * std::sin(kTwoPi * (w - sys.cavity.omega_c) / pm.period + pm.phase);
        out[i] = model.background + model.scale * mod * r2;
    }
    return out;
}

std::vector<double> shot_noise_weights(std::span<const double> counts) {
    std::vector<double> w(counts.size());
    for (size_t i = 0; i < counts.size(); i++) {
        if (!(counts[i] >= 0)) {
            domain_error("shot_noise_weights: counts must be >= 0");
        }
        w[i] = 1 / std::max(counts[i], 1.0);
    }
    return w;
}

void ScanDataset::validate() const {
    if (freq.size() != counts.size() || freq.size() != weight.size() || freq.size() != excluded.size()) {
        domain_error("scan data: column lengths differ");
    }
    if (freq.empty()) {
        domain_error("scan data: no points");
    }
    if (!(exposure > 0)) {
        domain_error("scan data: exposure must be > 0");
    }
}

size_t ScanDataset::active_points() const { return size_t(std::count(excluded.begin(), excluded.end(), 0)); }

ScanDataset synthetic_scan(const ScanModel &model, std::span<const double> freqs, Preparation prep,
                           std::mt19937_64 &rng, double exposure) {
    std::vector<double> mean = simulate_scan(model, freqs, prep);
    ScanDataset d;
    d.prep = prep;
    d.exposure = exposure;
    d.freq.assign(freqs.begin(), freqs.end());
    for (double &m : mean) {
        m *= exposure;
        d.counts.push_back(m > 0 ? double(std::poisson_distribution<long>(m)(rng)) : 0.0);
    }
    d.weight = shot_noise_weights(d.counts);
    d.excluded.assign(d.freq.size(), 0);
    return d;
}

void exclude_near_lines(ScanDataset &data, const CqedSystem &system, double half_width) {
    std::array<double, 4> lines = {system.a.omega_up, system.a.omega_down, system.b.omega_up, system.b.omega_down};
    for (size_t i = 0; i < data.freq.size(); i++) {
        for (double l : lines) {
            if (std::abs(data.freq[i] - l) <= half_width) {
                data.excluded[i] = 1;
            }
        }
    }
}

const char *fit_param_name(FitParam p) {
    static const char *names[kFitParamCount] = {
        "g_a",     "gamma_a", "sigma_a", "omega_a", "g_b",        "gamma_b",       "sigma_b",   "omega_b",
        "kappa_w", "kappa_l", "omega_c", "scale",   "background", "mod_amplitude", "mod_phase",
    };
    return names[static_cast<int>(p)];
}

FitParam parse_fit_param(const std::string &name) {
    for (int k = 0; k < kFitParamCount; k++) {
        if (name == fit_param_name(FitParam(k))) {
            return FitParam(k);
        }
    }
    domain_error("unknown fit parameter: " + name);
}

double get_param(const ScanModel &m, FitParam p) {
    const CqedSystem &s = m.system;
    switch (p) {
        case FitParam::g_a:
            return s.a.g;
        case FitParam::gamma_a:
            return s.a.gamma;
        case FitParam::sigma_a:
            return s.a.sigma;
        case FitParam::omega_a:
            return s.a.omega_down;
        case FitParam::g_b:
            return s.b.g;
        case FitParam::gamma_b:
            return s.b.gamma;
        case FitParam::sigma_b:
            return s.b.sigma;
        case FitParam::omega_b:
            return s.b.omega_down;
        case FitParam::kappa_w:
            return s.cavity.kappa_w;
        case FitParam::kappa_l:
            return s.cavity.kappa_l;
        case FitParam::omega_c:
            return s.cavity.omega_c;
        case FitParam::scale:
            return m.scale;
        case FitParam::background:
            return m.background;
        case FitParam::mod_amplitude:
            return m.modulation.amplitude;
        case FitParam::mod_phase:
            return m.modulation.phase;
    }
    return 0;
}

void set_param(ScanModel &m, FitParam p, double v) {
    CqedSystem &s = m.system;
    switch (p) {
        case FitParam::g_a:
            s.a.g = v;
            break;
        case FitParam::gamma_a:
            s.a.gamma = v;
            break;
        case FitParam::sigma_a:
            s.a.sigma = v;
            break;
        case FitParam::omega_a: {
            double d = v - s.a.omega_down;
            s.a.omega_down += d;
            s.a.omega_up += d;
            break;
        }
        case FitParam::g_b:
            s.b.g = v;
            break;
        case FitParam::gamma_b:
            s.b.gamma = v;
            break;
        case FitParam::sigma_b:
            s.b.sigma = v;
            break;
        case FitParam::omega_b: {
            double d = v - s.b.omega_down;
            s.b.omega_down += d;
            s.b.omega_up += d;
            break;
        }
        case FitParam::kappa_w:
            s.cavity.kappa_w = v;
            break;
        case FitParam::kappa_l:
            s.cavity.kappa_l = v;
            break;
        case FitParam::omega_c:
            s.cavity.omega_c = v;
            break;
        case FitParam::scale:
            m.scale = v;
            break;
        case FitParam::background:
            m.background = v;
            break;
        case FitParam::mod_amplitude:
            m.modulation.amplitude = v;
            break;
        case FitParam::mod_phase:
            m.modulation.phase = v;
            break;
    }
}

FreeMask &FreeMask::set(FitParam p, bool on) {
    free[static_cast<int>(p)] = on;
    return *this;
}

int FreeMask::count() const { return int(std::count(free.begin(), free.end(), true)); }

namespace {

bool is_positive_param(FitParam p) {
    switch (p) {
        case FitParam::g_a:
        case FitParam::gamma_a:
        case FitParam::sigma_a:
        case FitParam::g_b:
        case FitParam::gamma_b:
        case FitParam::sigma_b:
        case FitParam::kappa_w:
        case FitParam::kappa_l:
        case FitParam::scale:
            return true;
        default:
            return false;
    }
}

// Free parameters are optimized as dimensionless offsets (value - start) / unit.
struct Parameterization {
    ScanModel base;
    std::vector<FitParam> free;
    std::vector<double> start;
    std::vector<double> unit;

    Parameterization(const ScanModel &m, const FreeMask &mask) : base(m) {
        for (int k = 0; k < kFitParamCount; k++) {
            if (!mask.free[k]) {
                continue;
            }
            FitParam p = FitParam(k);
            double v = get_param(m, p);
            double u;
            switch (p) {
                case FitParam::scale:
                case FitParam::background:
                    u = std::max(1.0, std::abs(v));
                    break;
                case FitParam::mod_amplitude:
                case FitParam::mod_phase:
                    u = 1;
                    break;
                default:
                    u = ghz(1);
            }
            free.push_back(p);
            start.push_back(v);
            unit.push_back(u);
        }
    }

    ScanModel model(const Eigen::VectorXd &x) const {
        ScanModel m = base;
        for (size_t k = 0; k < free.size(); k++) {
            double v = start[k] + x(k) * unit[k];
            set_param(m, free[k], is_positive_param(free[k]) ? std::abs(v) : v);
        }
        return m;
    }
};

struct Problem {
    std::span<const ScanDataset> data;
    const Parameterization &par;
    FitOptions options;
    std::vector<std::vector<char>> trimmed;
    double center_half_width = 0;

    size_t n_residuals() const {
        size_t n = 0;
        for (size_t d = 0; d < data.size(); d++) {
            for (size_t i = 0; i < data[d].freq.size(); i++) {
                n += active(d, i);
            }
        }
        return n;
    }

    bool active(size_t d, size_t i) const { return !data[d].excluded[i] && !trimmed[d][i]; }

    // Residuals with (boosted) and without (plain) the center-of-cavity weight.
    void residuals(const ScanModel &m, Eigen::VectorXd &out, Eigen::VectorXd *plain = nullptr) const {
        out.resize(Eigen::Index(n_residuals()));
        if (plain) {
            plain->resize(out.size());
        }
        Eigen::Index r = 0;
        double wc = par.base.system.cavity.omega_c;
        for (size_t d = 0; d < data.size(); d++) {
            std::vector<double> sim = simulate_scan(m, data[d].freq, data[d].prep);
            for (size_t i = 0; i < sim.size(); i++) {
                if (!active(d, i)) {
                    continue;
                }
                double w = data[d].weight[i];
                double base = std::sqrt(w) * (data[d].counts[i] - data[d].exposure * sim[i]);
                double boost = std::abs(data[d].freq[i] - wc) <= center_half_width ? options.center_weight : 1.0;
                out(r) = std::sqrt(boost) * base;
                if (plain) {
                    (*plain)(r) = base;
                }
                r++;
            }
        }
    }
};

struct LmFunctor {
    typedef double Scalar;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    typedef Eigen::VectorXd InputType;
    typedef Eigen::VectorXd ValueType;
    typedef Eigen::MatrixXd JacobianType;

    const Problem *problem = nullptr;
    int n_in = 0;
    int n_out = 0;
    mutable int evaluations = 0;

    LmFunctor() = default;
    LmFunctor(const Problem *p, int in, int out) : problem(p), n_in(in), n_out(out) {}
    int inputs() const { return n_in; }
    int values() const { return n_out; }
    int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &f) const {
        evaluations++;
        problem->residuals(problem->par.model(x), f);
        return 0;
    }
    // Central differences, step 1e-5 max(1, |x|) in scaled coordinates.
    int df(const Eigen::VectorXd &x, Eigen::MatrixXd &jac) const {
        jac.resize(n_out, n_in);
        Eigen::VectorXd xp = x, fp(n_out), fm(n_out);
        for (int k = 0; k < n_in; k++) {
            double h = 1e-5 * std::max(1.0, std::abs(x(k)));
            xp(k) = x(k) + h;
            (*this)(xp, fp);
            xp(k) = x(k) - h;
            (*this)(xp, fm);
            xp(k) = x(k);
            jac.col(k) = (fp - fm) / (2 * h);
        }
        return 0;
    }
};

Eigen::MatrixXd jacobian(const Problem &pb, const Eigen::VectorXd &x) {
    Eigen::MatrixXd j;
    LmFunctor(&pb, int(x.size()), int(pb.n_residuals())).df(x, j);
    return j;
}

struct RunStats {
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> history;
};

RunStats run_lm(const Problem &pb, Eigen::VectorXd &x, const FitOptions &opt) {
    RunStats st;
    LmFunctor functor(&pb, int(x.size()), int(pb.n_residuals()));
    Eigen::LevenbergMarquardt<LmFunctor> lm(functor);
    lm.parameters.ftol = opt.tolerance;
    lm.parameters.xtol = opt.tolerance;
    lm.parameters.maxfev = 1000000;
    Eigen::LevenbergMarquardtSpace::Status status = lm.minimizeInit(x);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
        domain_error("fit: improper optimizer input");
    }
    st.history.push_back(lm.fnorm);
    status = Eigen::LevenbergMarquardtSpace::Running;
    while (status == Eigen::LevenbergMarquardtSpace::Running && st.iterations < opt.max_iterations) {
        status = lm.minimizeOneStep(x);
        st.iterations++;
        st.history.push_back(lm.fnorm);
    }
    st.evaluations = functor.evaluations;
    st.converged = status != Eigen::LevenbergMarquardtSpace::Running &&
                   status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                   status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters;
    return st;
}

struct NmContext {
    const Problem *pb;
    int evaluations = 0;
};

double nm_objective(const gsl_vector *v, void *ctx_) {
    auto *ctx = static_cast<NmContext *>(ctx_);
    Eigen::VectorXd x(v->size);
    for (size_t k = 0; k < v->size; k++) {
        x(Eigen::Index(k)) = gsl_vector_get(v, k);
    }
    Eigen::VectorXd f;
    ctx->evaluations++;
    ctx->pb->residuals(ctx->pb->par.model(x), f);
    return f.squaredNorm();
}

RunStats run_nelder_mead(const Problem &pb, Eigen::VectorXd &x, const FitOptions &opt) {
    RunStats st;
    size_t n = size_t(x.size());
    NmContext ctx{&pb};
    gsl_multimin_function fn{nm_objective, n, &ctx};
    gsl_vector *x0 = gsl_vector_alloc(n);
    gsl_vector *step = gsl_vector_alloc(n);
    for (size_t k = 0; k < n; k++) {
        gsl_vector_set(x0, k, x(Eigen::Index(k)));
        gsl_vector_set(step, k, 0.1);
    }
    gsl_multimin_fminimizer *s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x0, step);
    st.history.push_back(std::sqrt(s->fval));
    int limit = opt.max_iterations * int(n + 1) * 10;
    for (st.iterations = 0; st.iterations < limit; st.iterations++) {
        if (gsl_multimin_fminimizer_iterate(s)) {
            break;
        }
        st.history.push_back(std::sqrt(s->fval));
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.tolerance) == GSL_SUCCESS) {
            st.converged = true;
            break;
        }
    }
    for (size_t k = 0; k < n; k++) {
        x(Eigen::Index(k)) = gsl_vector_get(s->x, k);
    }
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(x0);
    gsl_vector_free(step);
    st.evaluations = ctx.evaluations;
    return st;
}

}  // namespace

namespace {

Problem untrimmed_problem(std::span<const ScanDataset> data, const Parameterization &par, const FitOptions &options) {
    Problem pb{data, par, options, {}, 0};
    for (const ScanDataset &d : data) {
        pb.trimmed.emplace_back(d.freq.size(), 0);
    }
    double ktot = par.base.system.cavity.kappa_tot();
    pb.center_half_width = options.center_half_width > 0 ? options.center_half_width : ktot / 4;
    return pb;
}

}  // namespace

std::vector<double> weighted_residuals(std::span<const ScanDataset> data, const ScanModel &model,
                                       const FitOptions &options) {
    Parameterization par(model, FreeMask{});
    Problem pb = untrimmed_problem(data, par, options);
    Eigen::VectorXd f;
    pb.residuals(model, f);
    return std::vector<double>(f.data(), f.data() + f.size());
}

std::vector<std::vector<double>> residual_jacobian(std::span<const ScanDataset> data, const ScanModel &model,
                                                   const FreeMask &mask, const FitOptions &options) {
    model.validate();
    Parameterization par(model, mask);
    Problem pb = untrimmed_problem(data, par, options);
    Eigen::MatrixXd j = jacobian(pb, Eigen::VectorXd::Zero(Eigen::Index(par.free.size())));
    std::vector<std::vector<double>> out(size_t(j.rows()), std::vector<double>(size_t(j.cols())));
    for (Eigen::Index r = 0; r < j.rows(); r++) {
        for (Eigen::Index c = 0; c < j.cols(); c++) {
            out[size_t(r)][size_t(c)] = j(r, c) / par.unit[size_t(c)];
        }
    }
    return out;
}

FitResult fit_scans(std::span<const ScanDataset> data, const ScanModel &model0, const FreeMask &mask,
                    const FitOptions &options) {
    model0.validate();
    if (data.empty()) {
        domain_error("fit: no datasets");
    }
    for (const ScanDataset &d : data) {
        d.validate();
    }
    Parameterization par(model0, mask);
    Problem pb = untrimmed_problem(data, par, options);
    int n = int(par.free.size());
    if (pb.n_residuals() < size_t(n)) {
        domain_error("fit: fewer active points than free parameters");
    }

    FitResult res;
    res.mask = mask;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    auto finish = [&](const RunStats &st) {
        res.model = par.model(x);
        res.iterations += st.iterations;
        res.evaluations += st.evaluations;
        res.converged = st.converged;
        res.residual_history.insert(res.residual_history.end(), st.history.begin(), st.history.end());
    };
    auto run = [&] {
        if (n == 0) {
            RunStats st;
            st.converged = true;
            Eigen::VectorXd f;
            pb.residuals(par.model(x), f);
            st.history.push_back(f.norm());
            return st;
        }
        return options.method == FitMethod::levenberg_marquardt ? run_lm(pb, x, options)
                                                                : run_nelder_mead(pb, x, options);
    };
    finish(run());

    if (options.robust_trim && n > 0) {
        Eigen::VectorXd f, plain;
        pb.residuals(par.model(x), f, &plain);
        double dof = std::max<double>(1, double(plain.size()) - n);
        double s = std::sqrt(plain.squaredNorm() / dof);
        Eigen::Index r = 0;
        size_t dropped = 0;
        for (size_t d = 0; d < data.size(); d++) {
            for (size_t i = 0; i < data[d].freq.size(); i++) {
                if (!pb.active(d, i)) {
                    continue;
                }
                if (std::abs(plain(r)) > options.trim_sigma * s) {
                    pb.trimmed[d][i] = 1;
                    dropped++;
                }
                r++;
            }
        }
        res.trimmed_points = dropped;
        if (dropped > 0) {
            if (pb.n_residuals() < size_t(n)) {
                domain_error("fit: robust trim left fewer points than free parameters");
            }
            finish(run());
        }
    }

    Eigen::VectorXd f;
    pb.residuals(res.model, f);
    res.residual_norm = f.norm();
    double dof = std::max<double>(1, double(f.size()) - n);
    res.reduced_chi2 = f.squaredNorm() / dof;
    for (int k = 0; k < kFitParamCount; k++) {
        res.value[k] = get_param(res.model, FitParam(k));
    }
    if (n > 0) {
        Eigen::MatrixXd j = jacobian(pb, x);
        res.gradient_norm = (j.transpose() * f).norm();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinV);
        Eigen::VectorXd sv = svd.singularValues();
        if (!(sv(n - 1) > 1e-10 * sv(0))) {
            Eigen::VectorXd v = svd.matrixV().col(n - 1);
            std::ostringstream msg;
            msg << "fit: singular normal equations; unidentifiable combination:";
            for (int k = 0; k < n; k++) {
                if (std::abs(v(k)) > 0.1) {
                    msg << ' ' << (v(k) > 0 ? '+' : '-') << format_double(std::abs(v(k))) << '*'
                        << fit_param_name(par.free[k]);
                }
            }
            throw FitError(ErrorCode::rank_deficient, msg.str(), res);
        }
        Eigen::MatrixXd vs = svd.matrixV() * sv.cwiseInverse().asDiagonal();
        Eigen::MatrixXd cov = vs * vs.transpose() * res.reduced_chi2;
        for (int k = 0; k < n; k++) {
            res.stderr_[static_cast<int>(par.free[k])] = std::sqrt(cov(k, k)) * par.unit[k];
        }
    }
    if (!res.converged) {
        throw FitError(ErrorCode::not_converged,
                       "fit: no convergence after " + std::to_string(res.iterations) + " iterations", res);
    }
    return res;
}

FitResult fit_scan(const ScanDataset &data, const ScanModel &model0, const FreeMask &mask,
                   const FitOptions &options) {
    return fit_scans(std::span<const ScanDataset>(&data, 1), model0, mask, options);
}

ScanDataset read_scan_csv(std::istream &in, Preparation prep) {
    ScanDataset d;
    d.prep = prep;
    std::string line;
    bool header = false;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells = split_csv_line(line);
        if (!header) {
            if (cells.size() < 2 || cells[0] != "freq_hz" || cells[1] != "counts") {
                throw Error(ErrorCode::io, "scan csv: expected header freq_hz,counts");
            }
            header = true;
            continue;
        }
        if (cells.size() < 2) {
            throw Error(ErrorCode::io, "scan csv: short record on line " + std::to_string(lineno));
        }
        try {
            d.freq.push_back(hz(std::stod(cells[0])));
            d.counts.push_back(std::stod(cells[1]));
        } catch (const std::exception &) {
            throw Error(ErrorCode::io, "scan csv: bad number on line " + std::to_string(lineno));
        }
    }
    if (d.freq.empty()) {
        throw Error(ErrorCode::io, "scan csv: no data");
    }
    d.weight = shot_noise_weights(d.counts);
    d.excluded.assign(d.freq.size(), 0);
    return d;
}

void write_fit_report(std::ostream &out, const FitResult &r) {
    out << "parameter,value,stderr,unit,free\n";
    for (int k = 0; k < kFitParamCount; k++) {
        FitParam p = FitParam(k);
        double scale = 1;
        const char *unit = "";
        switch (p) {
            case FitParam::scale:
            case FitParam::background:
                unit = "counts";
                break;
            case FitParam::mod_amplitude:
                break;
            case FitParam::mod_phase:
                unit = "rad";
                break;
            default:
                scale = 1 / ghz(1);
                unit = "GHz";
        }
        out << fit_param_name(p) << ',' << format_double(r.value[k] * scale) << ','
            << format_double(r.stderr_[k] * scale) << ',' << unit << ',' << int(r.mask.free[k]) << '\n';
    }
}

}  // namespace fbh
