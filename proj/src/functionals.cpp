#include "qnls/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "qnls/errors.hpp"
#include "qnls/norms.hpp"
#include "qnls/operators.hpp"
#include "qnls/parallel.hpp"

namespace qnls {

int default_s2(int d) { return static_cast<int>(std::floor(d / 2.0 + 1.0)) + 1; }

int default_s1(int d) {
    int by_class = static_cast<int>(std::floor(d / 2.0 + 2.5)) + 1;
    int by_pairing = static_cast<int>(std::ceil(default_s2(d) + 1.5));
    return std::max(by_class, by_pairing);
}

int default_s3(int d) { return static_cast<int>(std::floor((d + 2) / 2.0)) + 1; }

std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size()) throw ValidationError("trapezoid needs matching time and value arrays");
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
    return out;
}

namespace {

// Per-point weight w(x_axis) laid out on the flat grid.
std::vector<double> axis_weight(const Grid& g, int axis, double (*w)(double)) {
    std::vector<double> out(g.size());
    const auto& x = g.coordinates(axis);
    for (std::size_t n = 0; n < g.size(); ++n) out[n] = w(x[(n / g.stride(axis)) % g.points(axis)]);
    return out;
}

double inv_bracket2(double x) { return 1.0 / (bracket(x) * bracket(x)); }
double ratio_weight(double x) { return x / bracket(x); }
// -(x/<x>)'' = 2 sgn(x) / <x>^3, with sgn(0) = 0
double sgn_weight(double x) {
    double s = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    double b = bracket(x);
    return 2.0 * s / (b * b * b);
}
double quartic(double x) { return x * x * x * x; }

double weighted_sq(const SpectralField& f, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) s += std::norm(f[n]) * w[n % w.size()];
    return s * f.grid().cell_volume();
}

double weighted_re(const SpectralField& f, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) s += f[n].real() * w[n];
    return s * f.grid().cell_volume();
}

SpectralField re(const SpectralField& f) { return f.real_part(); }

void require_checkpoints(const Trajectory& traj, std::size_t count) {
    if (traj.checkpoints.size() < count)
        throw ValidationError("trajectory needs at least " + std::to_string(count) + " checkpoints");
}

int effective_padding(const Trajectory& traj, const ResidualOptions& options) {
    if (options.padding > 0) return options.padding;
    if (traj.model && traj.model->interaction() == InteractionClass::cubic) return 3;
    return 2;
}

template <class F>
std::vector<double> per_checkpoint(const Trajectory& traj, F&& f) {
    std::vector<double> out(traj.checkpoints.size());
    parallel_for(out.size(), [&](std::size_t c) { out[c] = f(traj.checkpoints[c].field); });
    return out;
}

double running_sup_at(const std::vector<double>& v, std::size_t upto) {
    return *std::max_element(v.begin(), v.begin() + upto + 1);
}

struct YSample {
    double full = 0.0, top = 0.0, h_norm2 = 0.0;
};

YSample y_sample(const SpectralField& phi, int s1) {
    const Grid& g = phi.grid();
    Spectrum spec(phi);
    YSample out;
    for (int k = 0; k < g.dim(); ++k) {
        auto w = axis_weight(g, k, inv_bracket2);
        out.full += weighted_sq(phi, w);
        for (const auto& alpha : multi_indices(g.dim(), 0, s1)) {
            double v = weighted_sq(spec.derivative(alpha.plus(k)), w);
            out.full += v;
            if (alpha.total() == s1) out.top += v;
        }
    }
    double h = sobolev_norm(phi, s1);
    out.h_norm2 = h * h;
    return out;
}

struct WSample {
    double full = 0.0, top = 0.0, h_norm4 = 0.0;
};

WSample w_sample(const SpectralField& phi, int s3) {
    const Grid& g = phi.grid();
    Spectrum spec(phi);
    WSample out;
    for (int k = 0; k < g.dim(); ++k) {
        const int nk = g.points(k);
        std::vector<double> A(nk, 0.0), B(nk, 0.0), Btop(nk, 0.0);
        const auto lam = symbols::Lambda(k, 0.5, g.dim()).sample(g);
        for (const auto& beta : multi_indices(g.dim(), 0, s3 - 1)) {
            auto prof = slice_profile(apply_symbol(spec.derivative(beta), lam), k);
            for (int j = 0; j < nk; ++j) A[j] += prof[j];
        }
        for (const auto& alpha : multi_indices(g.dim(), 0, s3)) {
            auto prof = slice_profile(spec.derivative(alpha.plus(k)), k);
            for (int j = 0; j < nk; ++j) {
                B[j] += prof[j];
                if (alpha.total() == s3) Btop[j] += prof[j];
            }
        }
        auto C = slice_profile(phi, k);
        const double h = g.spacing(k);
        for (int j = 0; j < nk; ++j) {
            out.full += h * A[j] * (B[j] + C[j]);
            out.top += h * A[j] * Btop[j];
        }
    }
    double n = sobolev_norm(phi, s3);
    out.h_norm4 = n * n * n * n;
    return out;
}

}  // namespace

SpectralField momentum_density(const SpectralField& phi, const MultiIndex& alpha, int k) {
    if (k < 0 || k >= phi.grid().dim()) throw ValidationError("axis k out of range");
    Spectrum spec(phi);
    SpectralField a = spec.derivative(alpha);
    SpectralField dk = spec.derivative(alpha.plus(k));
    return (a * dk.conj()).imag_part();
}

SpectralField momentum_density(const Trajectory& traj, const MultiIndex& alpha, int k, std::size_t checkpoint) {
    if (checkpoint >= traj.checkpoints.size()) throw ValidationError("checkpoint index out of range");
    return momentum_density(traj.checkpoints[checkpoint].field, alpha, k);
}

DiagnosticSeries good_term_Y(const Trajectory& traj, int s1) {
    require_checkpoints(traj, 1);
    if (s1 < 0) throw ValidationError("s1 must be >= 0");
    std::vector<YSample> samples(traj.checkpoints.size());
    parallel_for(samples.size(), [&](std::size_t c) { samples[c] = y_sample(traj.checkpoints[c].field, s1); });
    auto t = traj.times();
    std::vector<double> q(samples.size()), qtop(samples.size()), h(samples.size());
    for (std::size_t c = 0; c < samples.size(); ++c) {
        q[c] = samples[c].full;
        qtop[c] = samples[c].top;
        h[c] = samples[c].h_norm2;
    }
    auto Y = cumulative_trapezoid(t, q);
    auto Ytop = cumulative_trapezoid(t, qtop);
    DiagnosticSeries out;
    for (std::size_t c = 0; c < t.size(); ++c) {
        out.push("Y", t[c], Y[c]);
        out.push("Y_top", t[c], Ytop[c]);
        out.push("Y_bound", t[c], t[c] * running_sup_at(h, c) + Ytop[c]);
    }
    out.metadata["s1"] = s1;
    return out;
}

DiagnosticSeries good_term_W(const Trajectory& traj, int s3) {
    require_checkpoints(traj, 1);
    if (traj.checkpoints.front().field.grid().dim() < 2)
        throw ValidationError("the cubic good term W needs d >= 2");
    if (s3 < 1) throw ValidationError("s3 must be >= 1");
    std::vector<WSample> samples(traj.checkpoints.size());
    parallel_for(samples.size(), [&](std::size_t c) { samples[c] = w_sample(traj.checkpoints[c].field, s3); });
    auto t = traj.times();
    std::vector<double> q(samples.size()), qtop(samples.size()), h(samples.size());
    for (std::size_t c = 0; c < samples.size(); ++c) {
        q[c] = samples[c].full;
        qtop[c] = samples[c].top;
        h[c] = samples[c].h_norm4;
    }
    auto W = cumulative_trapezoid(t, q);
    auto Wtop = cumulative_trapezoid(t, qtop);
    DiagnosticSeries out;
    for (std::size_t c = 0; c < t.size(); ++c) {
        out.push("W", t[c], W[c]);
        out.push("W_top", t[c], Wtop[c]);
        out.push("W_bound", t[c], t[c] * running_sup_at(h, c) + Wtop[c]);
    }
    out.metadata["s3"] = s3;
    return out;
}

namespace {

double weighted_decay_sum(const SpectralField& phi, int s2) {
    const Grid& g = phi.grid();
    Spectrum spec(phi);
    double s = 0.0;
    for (const auto& beta : multi_indices(g.dim(), 0, s2)) {
        SpectralField f = spec.derivative(beta);
        for (int k = 0; k < g.dim(); ++k) {
            double v = weighted_L2_norm(f, k, 2.0);
            s += v * v;
        }
    }
    return s;
}

void check_quadratic_indices(int s1, int s2) {
    if (s2 < 0 || s1 < 0) throw ValidationError("s-indices must be >= 0");
    if (s2 + 2 > s1 + 0.5) throw ValidationError("s-indices violate s2 + 2 <= s1 + 1/2");
}

}  // namespace

DiagnosticSeries master_X(const Trajectory& traj, int s1, int s2) {
    require_checkpoints(traj, 1);
    check_quadratic_indices(s1, s2);
    std::vector<double> sob(traj.checkpoints.size()), dec(traj.checkpoints.size());
    parallel_for(sob.size(), [&](std::size_t c) {
        const auto& phi = traj.checkpoints[c].field;
        double h = sobolev_norm(phi, s1 + 0.5);
        sob[c] = h * h;
        dec[c] = weighted_decay_sum(phi, s2);
    });
    DiagnosticSeries out;
    for (std::size_t c = 0; c < sob.size(); ++c) {
        double t = traj.checkpoints[c].time;
        out.push("X", t, sob[c] + dec[c]);
        out.push("X_sobolev", t, sob[c]);
        out.push("X_weighted", t, dec[c]);
    }
    out.metadata["s1"] = s1;
    out.metadata["s2"] = s2;
    return out;
}

namespace {

// Pointwise pieces of the momentum identity for a = d^alpha phi on a refined grid.
struct LocalTerms {
    SpectralField a, dk_a;
    SpectralField flux_k;   // sum_j g^{kj} conj(a_j)
    SpectralField hflux_k;  // sum_j h^{kj} conj(a_j)
    SpectralField second_order, transport, h_derivative;
    SpectralField N, N_visc;  // N_visc = -i eps Delta^2 a
    SpectralField density;    // Im(a conj(d_k a))
};

LocalTerms local_terms(const ModelProblem& model, const SpectralField& coarse, const MultiIndex& alpha, int k,
                       double epsilon, int padding, bool with_divergence_terms) {
    if (model.conjugate_coefficient)
        throw ValidationError("momentum identity is defined for models without conjugate coupling (model " +
                              model.name + ")");
    const SpectralField phi = padding > 1 ? upsample(coarse, padding) : coarse;
    const Grid& g = phi.grid();
    const int d = g.dim();
    if (k < 0 || k >= d) throw ValidationError("axis k out of range");

    Spectrum spec(phi);
    std::array<SpectralField, kMaxDim> phi_j, a_j, ca_j;
    for (int j = 0; j < d; ++j) phi_j[j] = spec.partial(j);
    LocalTerms out;
    out.a = spec.derivative(alpha);
    for (int j = 0; j < d; ++j) {
        a_j[j] = spec.derivative(alpha.plus(j));
        ca_j[j] = a_j[j].conj();
    }
    out.dk_a = a_j[k];
    out.density = (out.a * ca_j[k]).imag_part();

    MetricField h = evaluate_perturbation(model, phi);
    const bool has_h = !model.metric.identically_zero;

    auto flux = [&](int i, bool include_g0) {
        SpectralField s(g);
        if (include_g0) s = model.metric.g0.entry(i) * ca_j[i];
        if (has_h)
            for (int j = 0; j < d; ++j) s += h.entries[i][j] * ca_j[j];
        return s;
    };
    out.flux_k = flux(k, true);
    out.hflux_k = flux(k, false);

    out.second_order = SpectralField(g);
    out.transport = SpectralField(g);
    if (with_divergence_terms) {
        SpectralField div_a(g), div_t(g);
        for (int i = 0; i < d; ++i) {
            SpectralField G = i == k ? out.flux_k : flux(i, true);
            div_a += partial_derivative(out.a * G, i);
            div_t += partial_derivative(out.dk_a * G, i);
        }
        out.second_order = -1.0 * re(partial_derivative(div_a, k));
        out.transport = 2.0 * re(div_t);
    }

    out.h_derivative = SpectralField(g);
    if (has_h) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out.h_derivative += re(a_j[i] * partial_derivative(h.entries[i][j], k) * ca_j[j]);
    }

    // N = d^alpha F_eff - sum_i d_i( d^alpha(sum_j h^{ij} phi_j) - sum_j h^{ij} a_j )
    SpectralField F_eff = evaluate_F(model, phi);
    if (has_h && model.form == Form::nondivergence)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) F_eff += partial_derivative(h.entries[i][j], i) * phi_j[j];
    out.N = multi_derivative(F_eff, alpha);
    if (has_h && alpha.total() > 0) {
        for (int i = 0; i < d; ++i) {
            SpectralField hphi(g), ha(g);
            for (int j = 0; j < d; ++j) {
                hphi += h.entries[i][j] * phi_j[j];
                ha += h.entries[i][j] * a_j[j];
            }
            out.N -= partial_derivative(multi_derivative(hphi, alpha) - ha, i);
        }
    }
    out.N_visc = SpectralField(g);
    if (epsilon > 0.0) out.N_visc = cplx(0.0, -epsilon) * laplacian(laplacian(out.a));
    return out;
}

}  // namespace

DiagnosticSeries momentum_identity_residual(const Trajectory& traj, const MultiIndex& alpha, int k,
                                            const ResidualOptions& options) {
    require_checkpoints(traj, 3);
    if (!traj.model) throw ValidationError("trajectory carries no model");
    const int pad = effective_padding(traj, options);
    const std::size_t count = traj.checkpoints.size();
    const double eps = traj.params.epsilon;

    std::vector<SpectralField> density(count);
    parallel_for(count, [&](std::size_t c) {
        SpectralField fine = pad > 1 ? upsample(traj.checkpoints[c].field, pad) : traj.checkpoints[c].field;
        density[c] = momentum_density(fine, alpha, k);
    });

    std::vector<double> res(count, 0.0), scale(count, 0.0);
    parallel_for(count - 2, [&](std::size_t i) {
        const std::size_t c = i + 1;
        LocalTerms L = local_terms(*traj.model, traj.checkpoints[c].field, alpha, k, eps, pad, true);
        const double tp = traj.checkpoints[c + 1].time, tm = traj.checkpoints[c - 1].time;
        SpectralField time_term = (-1.0 / (tp - tm)) * (density[c + 1] - density[c - 1]);
        SpectralField Ne = L.N + L.N_visc;
        SpectralField r = time_term + L.second_order + L.transport + L.h_derivative +
                          re(partial_derivative(L.a.conj() * Ne, k)) - 2.0 * re(Ne * L.dk_a.conj());
        res[c] = l2_norm(r.real_part());
        scale[c] = l2_norm(time_term);
    });

    DiagnosticSeries out;
    for (std::size_t c = 1; c + 1 < count; ++c) {
        double t = traj.checkpoints[c].time;
        out.push("residual_L2", t, res[c]);
        out.push("time_term_L2", t, scale[c]);
        out.push("residual_rel", t, scale[c] > 0.0 ? res[c] / scale[c] : res[c]);
    }
    out.metadata["alpha"] = alpha.label();
    out.metadata["k"] = k;
    out.metadata["padding"] = pad;
    return out;
}

EstimateLedger weighted_momentum_ledger(const Trajectory& traj, const MultiIndex& alpha, int k, int s1, int s2,
                                        const ResidualOptions& options) {
    require_checkpoints(traj, 2);
    if (!traj.model) throw ValidationError("trajectory carries no model");
    check_quadratic_indices(s1, s2);
    const int pad = effective_padding(traj, options);
    const std::size_t count = traj.checkpoints.size();
    const double eps = traj.params.epsilon;
    const double g0kk = traj.model->metric.g0.entry(k);

    enum Slot { boundary, sgn, good, hc, hder, nl_div, nl_src, v_div, v_src, kSlots };
    std::vector<std::array<double, kSlots>> s(count);
    std::vector<double> sob(count), alpha_norm(count), decay1(count), decay2(count), boundary_mass(count);
    parallel_for(count, [&](std::size_t c) {
        const auto& coarse = traj.checkpoints[c].field;
        LocalTerms L = local_terms(*traj.model, coarse, alpha, k, eps, pad, false);
        const Grid& g = L.a.grid();
        auto w = axis_weight(g, k, ratio_weight);
        auto w1 = axis_weight(g, k, inv_bracket2);
        auto wsgn = axis_weight(g, k, sgn_weight);
        auto& v = s[c];
        v[boundary] = weighted_re(L.density, w);
        v[sgn] = weighted_re(re(L.a * L.flux_k), wsgn);
        v[good] = g0kk * weighted_sq(L.dk_a, w1);
        v[hc] = weighted_re(re(L.dk_a * L.hflux_k), w1);
        v[hder] = weighted_re(L.h_derivative, w);
        v[nl_div] = -weighted_re(re(L.a.conj() * L.N), w1);
        v[nl_src] = -2.0 * weighted_re(re(L.N * L.dk_a.conj()), w);
        v[v_div] = -weighted_re(re(L.a.conj() * L.N_visc), w1);
        v[v_src] = -2.0 * weighted_re(re(L.N_visc * L.dk_a.conj()), w);

        double h = sobolev_norm(coarse, s1 + 0.5);
        sob[c] = h;
        alpha_norm[c] = l2_norm(multi_derivative(coarse, alpha));
        Spectrum spec(coarse);
        double d1 = 0.0, d2 = 0.0;
        for (const auto& beta : multi_indices(coarse.grid().dim(), 0, s2)) {
            SpectralField f = spec.derivative(beta);
            for (int i = 0; i < coarse.grid().dim(); ++i) {
                d1 += weighted_L2_norm(f, i, 1.0);
                d2 += weighted_L2_norm(f, i, 2.0);
            }
        }
        decay1[c] = d1;
        decay2[c] = d2;
        boundary_mass[c] = boundary_mass_fraction(coarse);
    });

    auto t = traj.times();
    auto integrate = [&](Slot slot) {
        std::vector<double> f(count);
        for (std::size_t c = 0; c < count; ++c) f[c] = s[c][slot];
        return cumulative_trapezoid(t, f).back();
    };

    EstimateLedger L;
    L.name = "weighted_momentum";
    const double T = t.back();
    const double bt = -s.back()[boundary], b0 = s.front()[boundary];
    const double sgn_terms = integrate(sgn), good_term = integrate(good), h_contamination = integrate(hc);
    const double h_derivative = integrate(hder), nd = integrate(nl_div), ns = integrate(nl_src);
    const double vd = integrate(v_div), vs = integrate(v_src);
    L.add("boundary_t", "identity", bt);
    L.add("boundary_0", "identity", b0);
    L.add("sgn_terms", "identity", sgn_terms);
    L.add("good_term", "lhs", good_term);
    L.add("h_contamination", "identity", h_contamination);
    L.add("h_derivative", "identity", h_derivative);
    L.add("nonlinear_divergence", "identity", nd);
    L.add("nonlinear_source", "identity", ns);
    L.add("viscous_divergence", "identity", vd);
    L.add("viscous_source", "identity", vs);
    // Integrated identity: 2 good + 2 h_contamination = boundary + sgn + h-derivative + nonlinear terms.
    L.identity_residual = bt + b0 + sgn_terms - 2.0 * good_term - 2.0 * h_contamination + h_derivative + nd + ns + vd + vs;

    auto Y = good_term_Y(traj, s1).at("Y").values.back();
    const double sup_sob = *std::max_element(sob.begin(), sob.end());
    const double sup_alpha = *std::max_element(alpha_norm.begin(), alpha_norm.end());
    const double sup_d1 = *std::max_element(decay1.begin(), decay1.end());
    const double sup_d2 = *std::max_element(decay2.begin(), decay2.end());
    const double sqY = std::sqrt(std::max(Y, 0.0));
    const double rt = std::sqrt(T);
    L.add("data_norm", "rhs", sob.front() * sob.front());
    L.add("sobolev_growth", "rhs", (1.0 + T) * sup_sob * sup_sob);
    L.add("decay_cross", "rhs", rt * sup_d1 * sup_alpha * sqY);
    L.add("decay_good", "rhs", sup_d2 * Y);
    L.add("cubic", "rhs", T * sup_sob * sup_sob * sup_sob);
    L.add("alpha_good", "rhs", rt * sup_alpha * sqY);

    L.lhs = std::abs(good_term);
    L.rhs = 0.0;
    for (const auto& term : L.terms)
        if (term.side == "rhs") L.rhs += term.value;
    L.measured_constant = L.rhs > 0.0 ? L.lhs / L.rhs : 0.0;
    const double worst_mass = *std::max_element(boundary_mass.begin(), boundary_mass.end());
    L.advisory = worst_mass > kDefaultBoundaryFraction;
    L.metadata["alpha"] = alpha.label();
    L.metadata["k"] = k;
    L.metadata["s1"] = s1;
    L.metadata["s2"] = s2;
    L.metadata["t"] = T;
    L.metadata["boundary_mass"] = worst_mass;
    L.metadata["padding"] = pad;
    return L;
}

std::vector<double> cubic_weight_integral(const SpectralField& phi, const MultiIndex& beta, int k) {
    const Grid& g = phi.grid();
    if (g.dim() < 2) throw ValidationError("the cubic weight needs d >= 2");
    if (k < 0 || k >= g.dim()) throw ValidationError("axis k out of range");
    auto prof = slice_profile(lambda_k(multi_derivative(phi, beta), k, 0.5), k);
    return cumulative_integral(prof, g.half_width(k));
}

std::vector<double> cubic_weight_integral(const Trajectory& traj, const MultiIndex& beta, int k,
                                          std::size_t checkpoint) {
    if (checkpoint >= traj.checkpoints.size()) throw ValidationError("checkpoint index out of range");
    return cubic_weight_integral(traj.checkpoints[checkpoint].field, beta, k);
}

WeightedEvolution weighted_norm_evolution(const Trajectory& traj, const MultiIndex& beta, int k,
                                          const ResidualOptions&) {
    require_checkpoints(traj, 1);
    if (!traj.model) throw ValidationError("trajectory carries no model");
    const Grid& g = traj.checkpoints.front().field.grid();
    if (k < 0 || k >= g.dim()) throw ValidationError("axis k out of range");
    const std::size_t count = traj.checkpoints.size();
    const ModelProblem& model = *traj.model;
    const double eps = traj.params.epsilon;
    Stepper stepper(model, g, traj.params);
    const auto x4 = axis_weight(g, k, quartic);

    struct Sample {
        double norm2 = 0.0, linear = 0.0, nonlinear = 0.0, viscous = 0.0;
        double x2 = 0.0, xdk = 0.0, x2_nl = 0.0, x2_visc = 0.0;
        double mass = 0.0;
    };
    std::vector<Sample> samples(count);
    parallel_for(count, [&](std::size_t c) {
        const auto& phi = traj.checkpoints[c].field;
        Spectrum spec(phi);
        SpectralField pb = spec.derivative(beta);
        SpectralField lin = cplx(0.0, 1.0) * multi_derivative(principal_operator(model, phi), beta);
        SpectralField nl = multi_derivative(from_spectrum(g, stepper.explicit_rhs(phi)), beta);
        SpectralField visc = -eps * laplacian(laplacian(pb));
        auto pairing = [&](const SpectralField& rate) { return 2.0 * weighted_re(re(pb.conj() * rate), x4); };
        Sample& s = samples[c];
        s.norm2 = weighted_sq(pb, x4);
        s.linear = pairing(lin);
        s.nonlinear = pairing(nl);
        s.viscous = eps > 0.0 ? pairing(visc) : 0.0;
        s.x2 = std::sqrt(s.norm2);
        s.xdk = weighted_L2_norm(spec.derivative(beta.plus(k)), k, 1.0);
        s.x2_nl = std::sqrt(weighted_sq(nl, x4));
        s.x2_visc = std::sqrt(weighted_sq(visc, x4));
        s.mass = boundary_mass_fraction(phi);
    });

    auto t = traj.times();
    std::vector<double> lin(count), nl(count), vis(count), dispersive(count), nl_bound(count), vis_bound(count);
    for (std::size_t c = 0; c < count; ++c) {
        lin[c] = samples[c].linear;
        nl[c] = samples[c].nonlinear;
        vis[c] = samples[c].viscous;
        dispersive[c] = 8.0 * samples[c].x2 * samples[c].xdk;
        nl_bound[c] = 2.0 * samples[c].x2 * samples[c].x2_nl;
        vis_bound[c] = 2.0 * samples[c].x2 * samples[c].x2_visc;
    }
    auto Ilin = cumulative_trapezoid(t, lin), Inl = cumulative_trapezoid(t, nl), Ivis = cumulative_trapezoid(t, vis);

    WeightedEvolution out;
    for (std::size_t c = 0; c < count; ++c) {
        double change = samples[c].norm2 - samples[0].norm2;
        out.series.push("x2_norm", t[c], samples[c].x2);
        out.series.push("x2_norm_sq", t[c], samples[c].norm2);
        out.series.push("identity_residual", t[c], change - (Ilin[c] + Inl[c] + Ivis[c]));
    }
    out.series.metadata["beta"] = beta.label();
    out.series.metadata["k"] = k;

    EstimateLedger& L = out.ledger;
    L.name = "weighted_norm_evolution";
    L.add("x2_norm_sq", "lhs", samples.back().norm2);
    L.add("linear", "identity", Ilin.back());
    L.add("nonlinear", "identity", Inl.back());
    L.add("viscous", "identity", Ivis.back());
    L.add("initial", "rhs", samples.front().norm2);
    L.add("dispersive_bound", "rhs", cumulative_trapezoid(t, dispersive).back());
    L.add("nonlinear_bound", "rhs", cumulative_trapezoid(t, nl_bound).back());
    L.add("viscous_bound", "rhs", cumulative_trapezoid(t, vis_bound).back());
    L.lhs = samples.back().norm2;
    for (const auto& term : L.terms)
        if (term.side == "rhs") L.rhs += term.value;
    L.measured_constant = L.rhs > 0.0 ? L.lhs / L.rhs : 0.0;
    L.identity_residual = out.series.at("identity_residual").values.back();
    double worst = 0.0;
    for (const auto& s : samples) worst = std::max(worst, s.mass);
    L.advisory = worst > kDefaultBoundaryFraction;
    L.metadata["beta"] = beta.label();
    L.metadata["k"] = k;
    L.metadata["boundary_mass"] = worst;
    return out;
}

BootstrapResult bootstrap_monitor(const Trajectory& traj, InteractionClass cls, const BootstrapOptions& options) {
    require_checkpoints(traj, 1);
    if (!traj.model) throw ValidationError("trajectory carries no model");
    if (!traj.model->is_free() && traj.model->interaction() != cls)
        throw ValidationError("bootstrap class " + to_string(cls) + " does not match model " + traj.model->name);
    const int d = traj.checkpoints.front().field.grid().dim();
    BootstrapResult out;
    auto t = traj.times();
    std::vector<double> num(t.size()), den;
    double base = 0.0;
    if (cls == InteractionClass::quadratic) {
        const int s1 = options.s1 > 0 ? options.s1 : default_s1(d);
        const int s2 = options.s2 > 0 ? options.s2 : default_s2(d);
        auto X = master_X(traj, s1, s2);
        auto Y = good_term_Y(traj, s1);
        for (std::size_t c = 0; c < t.size(); ++c) num[c] = X.at("X").values[c] + Y.at("Y").values[c];
        base = X.at("X").values.front();
        out.series.merge(X);
        out.series.merge(Y);
        out.series.metadata["s1"] = s1;
        out.series.metadata["s2"] = s2;
    } else {
        if (d < 2) throw ValidationError("the cubic bootstrap needs d >= 2");
        const int s3 = options.s3 > 0 ? options.s3 : default_s3(d);
        auto W = good_term_W(traj, s3);
        auto sob = per_checkpoint(traj, [&](const SpectralField& f) {
            double h = sobolev_norm(f, s3 + 0.5);
            return h * h;
        });
        for (std::size_t c = 0; c < t.size(); ++c) {
            num[c] = sob[c] + W.at("W").values[c];
            out.series.push("H_s3_half_sq", t[c], sob[c]);
        }
        base = sob.front();
        out.series.merge(W);
        out.series.metadata["s3"] = s3;
    }
    out.series.metadata["class"] = to_string(cls);
    out.series.metadata["ceiling"] = options.ceiling;
    if (base == 0.0) {
        out.zero_data = true;
        for (double tc : t) out.series.push("ratio", tc, num[0] == 0.0 ? 1.0 : 0.0);
        out.sup_ratio = 1.0;
        for (double v : num)
            if (v != 0.0) throw NumericalError("zero data produced a nonzero bootstrap quantity");
        return out;
    }
    for (std::size_t c = 0; c < t.size(); ++c) {
        double r = num[c] / base;
        out.series.push("ratio", t[c], r);
        out.sup_ratio = std::max(out.sup_ratio, r);
    }
    out.exceeded = out.sup_ratio > options.ceiling;
    return out;
}

DiagnosticSeries difference_good_term_Y(const Trajectory& v) {
    require_checkpoints(v, 1);
    auto q = per_checkpoint(v, [](const SpectralField& f) {
        const Grid& g = f.grid();
        Spectrum spec(f);
        double s = 0.0;
        for (int k = 0; k < g.dim(); ++k) {
            auto w = axis_weight(g, k, inv_bracket2);
            s += weighted_sq(spec.partial(k), w) + weighted_sq(f, w);
        }
        return s;
    });
    auto t = v.times();
    auto Y = cumulative_trapezoid(t, q);
    DiagnosticSeries out;
    for (std::size_t c = 0; c < t.size(); ++c) out.push("Y_v", t[c], Y[c]);
    return out;
}

DiagnosticSeries difference_good_term_W(const Trajectory& v, int s3) {
    require_checkpoints(v, 1);
    if (v.checkpoints.front().field.grid().dim() < 2) throw ValidationError("W_v needs d >= 2");
    auto q = per_checkpoint(v, [s3](const SpectralField& f) {
        const Grid& g = f.grid();
        Spectrum spec(f);
        double s = 0.0;
        for (int k = 0; k < g.dim(); ++k) {
            const int nk = g.points(k);
            std::vector<double> A(nk, 0.0);
            const auto lam = symbols::Lambda(k, 0.5, g.dim()).sample(g);
            for (const auto& beta : multi_indices(g.dim(), 0, s3 - 1)) {
                auto prof = slice_profile(apply_symbol(spec.derivative(beta), lam), k);
                for (int j = 0; j < nk; ++j) A[j] += prof[j];
            }
            auto B = slice_profile(spec.partial(k), k);
            auto C = slice_profile(f, k);
            for (int j = 0; j < nk; ++j) s += g.spacing(k) * A[j] * (B[j] + C[j]);
        }
        return s;
    });
    auto t = v.times();
    auto W = cumulative_trapezoid(t, q);
    DiagnosticSeries out;
    for (std::size_t c = 0; c < t.size(); ++c) out.push("W_v", t[c], W[c]);
    out.metadata["s3"] = s3;
    return out;
}

}  // namespace qnls
