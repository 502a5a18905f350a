#include "qnls/solver.hpp"

#include <cmath>
#include <sstream>

#include "qnls/errors.hpp"
#include "qnls/functionals.hpp"
#include "qnls/norms.hpp"
#include "qnls/parallel.hpp"

namespace qnls {

void SolverParams::validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("solver.epsilon must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("solver.dt must be > 0");
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("solver.T must be > 0");
    if (scheme != 1 && scheme != 2) throw ValidationError("solver.scheme must be 1 or 2");
    if (checkpoint_stride < 1) throw ValidationError("solver.checkpoint_stride must be >= 1");
    if (!(growth_limit > 1.0)) throw ValidationError("solver.growth_limit must exceed 1");
    double ratio = T / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ValidationError("solver.T must be an integer multiple of solver.dt");
}

long SolverParams::steps() const { return std::lround(T / dt); }

std::vector<double> Trajectory::times() const {
    std::vector<double> t;
    for (const auto& c : checkpoints) t.push_back(c.time);
    return t;
}

Stepper::Stepper(const ModelProblem& model, const Grid& grid, const SolverParams& params)
    : model_(model), grid_(grid), params_(params) {
    if (grid.dim() != model.dim()) throw ValidationError("model dimension does not match the grid");
    full_.resize(grid.size());
    half_.resize(grid.size());
    keep_.resize(grid.size());
    sobolev_weight_.resize(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) {
        auto idx = grid.unravel(n);
        double q = 0.0, q2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            double xi = grid.frequencies(a)[idx[a]];
            q += model.metric.g0.entry(a) * xi * xi;
            q2 += xi * xi;
        }
        // phi_t = -i q phi - eps |xi|^4 phi on the constant-coefficient part.
        cplx rate(-params.epsilon * q2 * q2, -q);
        full_[n] = std::exp(rate * params.dt);
        half_[n] = std::exp(rate * (0.5 * params.dt));
        keep_[n] = !params.dealias || dealias_keeps(grid, idx);
        sobolev_weight_[n] = std::pow(1.0 + q2, params.monitor_s);
    }
}

void Stepper::apply_linear(std::vector<cplx>& c, const std::vector<cplx>& factor) const {
    for (std::size_t n = 0; n < c.size(); ++n) c[n] *= factor[n];
}

void Stepper::mask(std::vector<cplx>& c) const {
    for (std::size_t n = 0; n < c.size(); ++n)
        if (!keep_[n]) c[n] = 0.0;
}

double Stepper::monitored_norm2(const std::vector<cplx>& c) const {
    double s = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) s += sobolev_weight_[n] * std::norm(c[n]);
    return s;
}

std::vector<cplx> Stepper::explicit_rhs(const SpectralField& phi) const {
    if (model_.is_free()) return std::vector<cplx>(grid_.size(), cplx(0.0, 0.0));
    SpectralField P = perturbation_operator(model_, phi, false);
    SpectralField F = evaluate_F(model_, phi);
    std::vector<cplx> r(grid_.size());
    const cplx i(0.0, 1.0);
    for (std::size_t n = 0; n < r.size(); ++n) r[n] = i * (P[n] - F[n]);
    forward_transform(grid_, r.data());
    mask(r);
    return r;
}

SpectralField Stepper::step(const SpectralField& phi) const {
    if (phi.grid() != grid_) throw ValidationError("field grid differs from the stepper grid");
    std::vector<cplx> c = to_spectrum(phi);
    const double before = monitored_norm2(c);
    const double dt = params_.dt;
    if (model_.is_free()) {
        apply_linear(c, full_);
    } else if (params_.scheme == 1) {
        auto k1 = explicit_rhs(phi);
        for (std::size_t n = 0; n < c.size(); ++n) c[n] += dt * k1[n];
        apply_linear(c, full_);
    } else {
        apply_linear(c, half_);
        SpectralField u = from_spectrum(grid_, c);
        auto k1 = explicit_rhs(u);
        std::vector<cplx> mid = c;
        for (std::size_t n = 0; n < c.size(); ++n) mid[n] += 0.5 * dt * k1[n];
        auto k2 = explicit_rhs(from_spectrum(grid_, mid));
        for (std::size_t n = 0; n < c.size(); ++n) c[n] += dt * k2[n];
        apply_linear(c, half_);
    }
    const double after = monitored_norm2(c);
    if (!std::isfinite(after)) throw NumericalError("non-finite values produced by the step");
    if (before > 0.0 && after > params_.growth_limit * params_.growth_limit * before) {
        std::ostringstream msg;
        msg << "stability guard rejected the step: H^" << params_.monitor_s << " norm grew from " << std::sqrt(before)
            << " to " << std::sqrt(after) << " (relative units)";
        throw NumericalError(msg.str());
    }
    return from_spectrum(grid_, std::move(c));
}

SpectralField step(const SpectralField& phi, const ModelProblem& model, const SolverParams& params) {
    params.validate();
    return Stepper(model, phi.grid(), params).step(phi);
}

namespace {

void record(Trajectory& traj, double t, const SpectralField& phi) {
    traj.checkpoints.push_back({t, phi});
    traj.diagnostics.push("L2", t, l2_norm(phi));
    traj.diagnostics.push("H_s", t, sobolev_norm(phi, traj.params.monitor_s));
    if (traj.params.weighted) {
        double frac = boundary_mass_fraction(phi);
        traj.diagnostics.push("boundary_mass", t, frac);
        if (frac > kDefaultBoundaryFraction && traj.warnings.empty())
            traj.warnings.push_back("boundary mass fraction " + std::to_string(frac) + " at t=" + std::to_string(t) +
                                    " exceeds the truncation threshold");
    }
}

}  // namespace

Trajectory run(const ModelProblem& model, const SpectralField& phi0, const SolverParams& params) {
    params.validate();
    if (!phi0.all_finite()) throw ValidationError("initial data contains non-finite values");
    Trajectory traj;
    traj.params = params;
    traj.model = std::make_shared<const ModelProblem>(model);
    traj.diagnostics.metadata["model"] = model.name;
    traj.diagnostics.metadata["epsilon"] = params.epsilon;
    traj.diagnostics.metadata["dt"] = params.dt;
    traj.diagnostics.metadata["scheme"] = params.scheme;
    traj.diagnostics.metadata["monitor_s"] = params.monitor_s;

    SpectralField phi = params.dealias ? dealias(phi0) : phi0;
    if (params.smallness > 0.0) {
        double size = sobolev_norm(phi, params.monitor_s);
        if (size > params.smallness)
            traj.warnings.push_back("initial data H^s norm " + std::to_string(size) + " exceeds the smallness threshold " +
                                    std::to_string(params.smallness));
    }
    Stepper stepper(*traj.model, phi.grid(), params);
    record(traj, 0.0, phi);
    const long steps = params.steps();
    for (long k = 1; k <= steps; ++k) {
        try {
            phi = stepper.step(phi);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (step " + std::to_string(k) + ", t=" +
                                 std::to_string(k * params.dt) + ")");
        }
        if (k % params.checkpoint_stride == 0 || k == steps) record(traj, k * params.dt, phi);
    }
    return traj;
}

ContinuationResult viscosity_continuation(const ModelProblem& model, const SpectralField& phi0,
                                          const SolverParams& params, int halvings, double distance_index) {
    if (halvings < 1) throw ValidationError("halvings must be >= 1");
    if (!(params.epsilon > 0.0)) throw ValidationError("viscosity continuation needs epsilon > 0");
    ContinuationResult result;
    result.distance_index = distance_index;
    result.members.resize(halvings + 1);
    for (int n = 0; n <= halvings; ++n) result.members[n].epsilon = params.epsilon / std::pow(2.0, n);
    parallel_for(result.members.size(), [&](std::size_t n) {
        auto& m = result.members[n];
        SolverParams p = params;
        p.epsilon = m.epsilon;
        try {
            m.trajectory = run(model, phi0, p);
        } catch (const NumericalError& e) {
            m.failed = true;
            m.failure = e.what();
        }
    });
    for (std::size_t n = 0; n + 1 < result.members.size(); ++n) {
        auto& a = result.members[n];
        auto& b = result.members[n + 1];
        if (a.failed || b.failed) {
            result.partial = true;
            continue;
        }
        a.distance_to_next = sobolev_norm(a.trajectory.final_field() - b.trajectory.final_field(), distance_index);
    }
    for (auto& m : result.members)
        if (m.failed) result.partial = true;
    return result;
}

DiagnosticSeries difference_run(const ModelProblem& model, const SpectralField& phi0_a, const SpectralField& phi0_b,
                                const SolverParams& params, const DifferenceRunOptions& options) {
    if (phi0_a.grid() != phi0_b.grid()) throw ValidationError("difference run needs both data on one grid");
    Trajectory a, b;
    parallel_for(2, [&](std::size_t i) {
        if (i == 0)
            a = run(model, phi0_a, params);
        else
            b = run(model, phi0_b, params);
    });
    Trajectory v;
    v.params = params;
    v.model = a.model;
    for (std::size_t n = 0; n < a.checkpoints.size(); ++n)
        v.checkpoints.push_back({a.checkpoints[n].time, a.checkpoints[n].field - b.checkpoints[n].field});
    DiagnosticSeries out;
    for (const auto& c : v.checkpoints) {
        out.push("v_L2", c.time, l2_norm(c.field));
        out.push("v_H_half", c.time, sobolev_norm(c.field, 0.5));
    }
    out.merge(difference_good_term_Y(v));
    if (phi0_a.grid().dim() >= 2) {
        int s3 = options.s3 > 0 ? options.s3 : default_s3(phi0_a.grid().dim());
        out.merge(difference_good_term_W(v, s3));
    }
    out.metadata["model"] = model.name;
    return out;
}

}  // namespace qnls
