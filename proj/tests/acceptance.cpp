// Acceptance run: one PASS/FAIL line per criterion with its measured values.
// Tolerances and runtime budgets are fixed here; the exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qnls/functionals.hpp"
#include "qnls/lemmas.hpp"
#include "qnls/norms.hpp"
#include "qnls/scenario.hpp"
#include "qnls/solver.hpp"

using namespace qnls;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> body;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

SpectralField gaussian(const Grid& g, double amplitude, double width, std::vector<double> wavevector = {}) {
    InitialData d;
    d.amplitude = amplitude;
    d.width = width;
    d.center.assign(g.dim(), 0.0);
    wavevector.resize(g.dim(), 0.0);
    d.wavevector = wavevector;
    return make_initial_data(g, d);
}

// ---- 1: operator identities at n = 256, 100 samples
constexpr double kIdentityTol = 1e-6;

Outcome operator_identities() {
    SuiteOptions o;
    o.count = 100;
    o.points = 256;
    auto reports = run_lemma_suite("identities", o);
    Outcome out{true, ""};
    for (const auto& r : reports) {
        bool ok = r.all_finite && r.max_ratio <= kIdentityTol;
        out.pass = out.pass && ok;
        out.detail += r.id + "=" + fmt("%.1e", r.max_ratio) + " ";
    }
    return out;
}

// ---- 2: free elliptic flow against closed forms
constexpr double kPlaneWaveTol = 1e-10;
constexpr double kGaussianRelTol = 1e-6;

Outcome linear_exactness() {
    const double R = 40.0 * M_PI;
    const Grid g(1, 1024, R);
    const auto model = builtin_model("free", 1);
    SolverParams p;
    p.epsilon = 0.0;
    p.dt = 1e-3;
    p.T = 1.0;
    p.checkpoint_stride = 1000;

    // Plane wave e^{i xi x} evolves as e^{-i xi^2 t}.
    const double xi = 5.0 * M_PI / R;
    auto plane = SpectralField::from_function(g, [&](const double* x) { return std::exp(cplx(0.0, xi * x[0])); });
    auto exact_plane = SpectralField::from_function(
        g, [&](const double* x) { return std::exp(cplx(0.0, xi * x[0] - xi * xi * p.T)); });
    double plane_err = l2_norm(run(model, plane, p).final_field() - exact_plane);

    // exp(-x^2/2w^2) evolves as sqrt(w^2/(w^2+2it)) exp(-x^2/(2(w^2+2it))).
    const double w = 1.0;
    auto initial = gaussian(g, 1.0, w);
    const cplx s = cplx(w * w, 2.0 * p.T);
    auto exact = SpectralField::from_function(
        g, [&](const double* x) { return std::sqrt(w * w / s) * std::exp(-x[0] * x[0] / (2.0 * s)); });
    double gauss_rel = l2_norm(run(model, initial, p).final_field() - exact) / l2_norm(exact);

    return {plane_err < kPlaneWaveTol && gauss_rel < kGaussianRelTol,
            "plane_L2=" + fmt("%.2e", plane_err) + " gaussian_rel=" + fmt("%.2e", gauss_rel)};
}

// ---- 3: momentum identity residual convergence
constexpr double kDtFactor = 1.8;
constexpr double kSpaceFactor = 4.0;

double residual_size(const Grid& g, double width, double dt, double T, int stride, const MultiIndex& alpha) {
    const auto model = builtin_model("toy-quadratic", 1);
    SolverParams p;
    p.dt = dt;
    p.T = T;
    p.checkpoint_stride = stride;
    auto traj = run(model, gaussian(g, 1e-3, width, {1.0}), p);
    return max_of(momentum_identity_residual(traj, alpha, 0).at("residual_L2").values);
}

Outcome momentum_residual() {
    Outcome out{true, ""};
    const double R = 8.0 * M_PI;
    for (int order = 0; order <= 2; ++order) {
        const MultiIndex alpha = MultiIndex::zero(1).plus(0, order);
        // Time: dt and the checkpoint spacing halve together (the time derivative is a
        // centred difference across checkpoints).
        const Grid g(1, 128, R);
        double coarse = residual_size(g, 1.0, 1e-3, 0.1, 10, alpha);
        double fine = residual_size(g, 1.0, 5e-4, 0.1, 10, alpha);
        // Space: n doubles at a dt whose temporal error sits below the spatial one.
        double n128 = residual_size(Grid(1, 128, R), 0.6, 5e-5, 0.1, 10, alpha);
        double n256 = residual_size(Grid(1, 256, R), 0.6, 5e-5, 0.1, 10, alpha);
        double ft = coarse / fine, fs = n128 / n256;
        out.pass = out.pass && ft >= kDtFactor && fs >= kSpaceFactor;
        out.detail += "|a|=" + std::to_string(order) + ": dt x" + fmt("%.2f", ft) + " n x" + fmt("%.1f", fs) + " ";
    }
    return out;
}

// ---- 4: good-term sandwiches
constexpr double kSandwichSlack = 1e-9;

Outcome sandwiches() {
    Outcome out{true, ""};
    {
        const Grid g(1, 256, 20.0);
        const auto model = builtin_model("toy-quadratic", 1);
        SolverParams p;
        p.dt = 1e-3;
        p.T = 1.0;
        p.checkpoint_stride = 50;
        auto traj = run(model, gaussian(g, 1e-2, 1.0, {1.0}), p);
        auto Y = good_term_Y(traj, default_s1(1));
        double worst_lo = 0.0, worst_hi = 0.0;
        for (std::size_t i = 0; i < Y.at("Y").values.size(); ++i) {
            worst_lo = std::max(worst_lo, Y.at("Y_top").values[i] - Y.at("Y").values[i]);
            worst_hi = std::max(worst_hi, Y.at("Y").values[i] - Y.at("Y_bound").values[i]);
        }
        bool ok = worst_lo <= kSandwichSlack && worst_hi <= kSandwichSlack;
        out.pass = out.pass && ok;
        out.detail += "Y(d=1) lower gap " + fmt("%.1e", worst_lo) + " upper gap " + fmt("%.1e", worst_hi) + "; ";
    }
    {
        const Grid g(2, {128, 128, 1}, {10.0, 10.0, 1.0});
        const auto model = builtin_model("toy-cubic", 2);
        SolverParams p;
        p.dt = 1e-3;
        p.T = 1.0;
        p.checkpoint_stride = 100;
        auto traj = run(model, gaussian(g, 1e-1, 0.7, {1.0, 0.0}), p);
        auto W = good_term_W(traj, default_s3(2));
        double worst_lo = 0.0, worst_hi = 0.0;
        for (std::size_t i = 0; i < W.at("W").values.size(); ++i) {
            worst_lo = std::max(worst_lo, W.at("W_top").values[i] - W.at("W").values[i]);
            worst_hi = std::max(worst_hi, W.at("W").values[i] - W.at("W_bound").values[i]);
        }
        bool ok = worst_lo <= kSandwichSlack && worst_hi <= kSandwichSlack;
        out.pass = out.pass && ok;
        out.detail += "W(d=2) lower gap " + fmt("%.1e", worst_lo) + " upper gap " + fmt("%.1e", worst_hi);
    }
    return out;
}

// ---- 5: bootstrap ratios
constexpr double kBootstrapCeiling = 2.0;
constexpr double kResolutionDrift = 0.10;

double bootstrap_ratio(const std::string& name, const Grid& g, double amplitude, double width,
                       const BootstrapOptions& o, double dt) {
    const auto model = builtin_model(name, g.dim());
    SolverParams p;
    p.dt = dt;
    p.T = 1.0;
    p.checkpoint_stride = static_cast<int>(std::lround(0.05 / dt));
    auto traj = run(model, gaussian(g, amplitude, width), p);
    return bootstrap_monitor(traj, model.interaction(), o).sup_ratio;
}

Outcome bootstrap() {
    Outcome out{true, ""};
    BootstrapOptions o;
    o.s1 = 5;
    o.ceiling = kBootstrapCeiling;
    std::vector<double> ratios;
    for (double a : {1e-2, 1e-3, 1e-4}) ratios.push_back(bootstrap_ratio("toy-quadratic", Grid(1, 256, 40.0), a, 3.0, o, 1e-3));
    double doubled = bootstrap_ratio("toy-quadratic", Grid(1, 512, 40.0), 1e-2, 3.0, o, 1e-3);
    bool monotone = ratios[0] >= ratios[1] && ratios[1] >= ratios[2] && ratios[2] >= 1.0;
    // Drift is measured on the excess over 1, the part that actually moves.
    double drift = std::abs((doubled - 1.0) / (ratios[0] - 1.0) - 1.0);
    bool ok = max_of(ratios) <= kBootstrapCeiling && monotone && drift <= kResolutionDrift;
    out.pass = ok;
    out.detail = "quadratic " + fmt("%.6f", ratios[0]) + " " + fmt("%.6f", ratios[1]) + " " + fmt("%.6f", ratios[2]) +
                 (monotone ? " monotone" : " NOT monotone") + ", doubling drift " + fmt("%.1e", drift) + "; ";

    BootstrapOptions c;
    c.s3 = 4;
    c.ceiling = kBootstrapCeiling;
    double cubic = bootstrap_ratio("toy-cubic", Grid(2, {64, 64, 1}, {20.0, 20.0, 1.0}), 1e-2, 3.0, c, 1e-3);
    out.pass = out.pass && cubic <= kBootstrapCeiling;
    out.detail += "cubic d=2 " + fmt("%.6f", cubic);
    return out;
}

// ---- 6: viscosity Cauchy sequence
constexpr double kCauchyRatio = 0.7;

Outcome viscosity_cauchy() {
    const Grid g(1, 256, 20.0);
    const auto model = builtin_model("toy-quadratic", 1);
    SolverParams p;
    p.epsilon = 1e-3;
    p.dt = 1e-3;
    p.T = 1.0;
    p.checkpoint_stride = 100;
    auto res = viscosity_continuation(model, gaussian(g, 1e-1, 1.0), p, 3, 3.0);
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < res.members.size(); ++i) d.push_back(res.members[i].distance_to_next);
    bool decreasing = !res.partial && d.size() == 3 && d[0] > d[1] && d[1] > d[2];
    double ratio = d.size() == 3 ? d[2] / d[1] : kInf;
    return {decreasing && ratio <= kCauchyRatio, "H3 distances " + fmt("%.3e", d[0]) + " " + fmt("%.3e", d[1]) + " " +
                                                     fmt("%.3e", d[2]) + ", final ratio " + fmt("%.3f", ratio)};
}

// ---- 7: inequality suites
constexpr double kDoublingDrift = 0.10;

Outcome lemma_suites() {
    SuiteOptions o;
    o.count = 100;
    o.points = 128;
    Outcome out{true, ""};
    double worst = 0.0;
    std::string worst_id;
    int n = 0;
    for (const auto& name : lemma_suite_names()) {
        if (name == "identities") continue;
        for (const auto& r : run_lemma_suite(name, o)) {
            ++n;
            bool ok = r.all_finite && std::isfinite(r.max_ratio) && r.doubling_change <= kDoublingDrift;
            if (!ok) {
                out.pass = false;
                out.detail += r.id + " drift " + fmt("%.3f", r.doubling_change) + " ";
            }
            if (r.doubling_change >= worst) {
                worst = r.doubling_change;
                worst_id = r.id;
            }
        }
    }
    out.detail += std::to_string(n) + " reports, worst drift " + fmt("%.3f", worst) + " (" + worst_id + ")";
    return out;
}

// ---- 8: continuous dependence of the difference
constexpr double kDifferenceGrowth = 2.0;

Outcome difference_growth() {
    const Grid g(1, 256, 20.0);
    const auto model = builtin_model("toy-quadratic", 1);
    SolverParams p;
    p.dt = 1e-3;
    p.T = 1.0;
    p.checkpoint_stride = 20;
    auto a = gaussian(g, 1e-2, 1.0, {1.0});
    InitialData bump;
    bump.amplitude = 1.0;
    bump.width = 1.5;
    bump.center = {0.5};
    bump.wavevector = {0.0};
    auto psi = dealias(make_initial_data(g, bump));
    psi = (1e-6 / sobolev_norm(psi, 0.5)) * psi;
    auto diff = difference_run(model, a, a + psi, p);
    const auto& v = diff.at("v_H_half").values;
    double growth = max_of(v) / v.front();
    return {growth <= kDifferenceGrowth,
            "||v(0)||=" + fmt("%.3e", v.front()) + " sup ratio " + fmt("%.4f", growth)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "operator identities", 10.0, operator_identities},
        {2, "linear solver exactness", 30.0, linear_exactness},
        {3, "momentum identity residual", 120.0, momentum_residual},
        {4, "good-term sandwiches", 180.0, sandwiches},
        {5, "bootstrap boundedness", 300.0, bootstrap},
        {6, "viscosity Cauchy property", 300.0, viscosity_cauchy},
        {7, "lemma suites", 300.0, lemma_suites},
        {8, "difference continuity", 120.0, difference_growth},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs <= c.budget_s;
        bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("[%s] %d %s: %s (%.1fs / %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures;
}
