#include "qnls/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "qnls/checkpoint.hpp"
#include "qnls/errors.hpp"
#include "qnls/hashing.hpp"
#include "qnls/norms.hpp"
#include "qnls/operators.hpp"
#include "qnls/parallel.hpp"

namespace qnls {

int EnsembleSpec::resolved_max_mode() const {
    if (max_mode > 0) return max_mode;
    int n = grid.points(0);
    for (int a = 1; a < grid.dim(); ++a) n = std::min(n, grid.points(a));
    return std::max(1, static_cast<int>(std::floor(cutoff * (n / 2))));
}

void EnsembleSpec::validate() const {
    if (count < 0) throw ValidationError("ensemble.count must be >= 0");
    if (!(cutoff > 0.0) || cutoff > 2.0 / 3.0) throw ValidationError("ensemble.cutoff must lie in (0, 2/3]");
    if (low_cut < 0.0 || low_cut >= 1.0) throw ValidationError("ensemble.low_cut must lie in [0, 1)");
    if (window < 0.0) throw ValidationError("ensemble.window must be >= 0");
    const int K = resolved_max_mode();
    for (int a = 0; a < grid.dim(); ++a)
        if (3 * K > grid.points(a))
            throw ValidationError("ensemble.max_mode exceeds 2/3 of the Nyquist wavenumber on axis " +
                                  std::to_string(a));
}

EnsembleSpec EnsembleSpec::refined(int factor) const {
    EnsembleSpec out = *this;
    out.max_mode = resolved_max_mode();
    out.grid = grid.refined(factor);
    return out;
}

SpectralField ensemble_member(const EnsembleSpec& spec, int stream, int index) {
    spec.validate();
    const Grid& g = spec.grid;
    const int d = g.dim();
    const int K = spec.resolved_max_mode();
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<cplx> coeffs(g.size(), cplx(0.0, 0.0));
    std::array<int, kMaxDim> k{0, 0, 0};
    for (int a = 0; a < d; ++a) k[a] = -K;
    int modes = 0;
    const double low = spec.low_cut * K;
    while (true) {
        double re = normal(rng), im = normal(rng);
        double norm2 = 0.0;
        for (int a = 0; a < d; ++a) norm2 += double(k[a]) * k[a];
        if (std::sqrt(norm2) >= low) {
            std::size_t slot = 0;
            for (int a = 0; a < d; ++a) {
                int j = ((k[a] % g.points(a)) + g.points(a)) % g.points(a);
                slot += j * g.stride(a);
            }
            coeffs[slot] = cplx(re, im);
            ++modes;
        }
        int a = d - 1;
        while (a >= 0 && k[a] == K) k[a--] = -K;
        if (a < 0) break;
        ++k[a];
    }
    const double scale = modes > 0 ? spec.amplitude / std::sqrt(double(modes)) : 0.0;
    for (auto& c : coeffs) c *= scale;
    SpectralField f = from_spectrum(g, std::move(coeffs));
    if (spec.window > 0.0) {
        double R = g.half_width(0);
        for (int a = 1; a < d; ++a) R = std::min(R, g.half_width(a));
        const double W = spec.window * R;
        for (std::size_t n = 0; n < g.size(); ++n) {
            auto idx = g.unravel(n);
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += std::pow(g.coordinates(a)[idx[a]], 2);
            f[n] *= std::exp(-r2 / (2.0 * W * W));
        }
    }
    return f;
}

std::vector<SpectralField> generate_ensemble(const EnsembleSpec& spec, int stream) {
    std::vector<SpectralField> out(spec.count);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = ensemble_member(spec, stream, static_cast<int>(i)); });
    return out;
}

SpectralField dilate(const SpectralField& f, int lambda) {
    if (lambda < 1) throw ValidationError("dilation factor must be a positive integer");
    const Grid& g = f.grid();
    auto c = to_spectrum(f);
    std::vector<cplx> out(c.size(), cplx(0.0, 0.0));
    double peak = 0.0;
    for (auto v : c) peak = std::max(peak, std::abs(v));
    // Transform roundoff is not content; dropping it keeps the representability check honest.
    const double floor = 1e-13 * peak;
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (std::abs(c[n]) <= floor) continue;
        auto idx = g.unravel(n);
        std::size_t slot = 0;
        long parity = 0;
        for (int a = 0; a < g.dim(); ++a) {
            long k = g.wavenumber(a, idx[a]);
            long target = k * lambda;
            if (2 * std::abs(target) >= g.points(a))
                throw ValidationError("dilated field is not representable on this grid");
            parity += k * (lambda - 1);
            slot += ((target % g.points(a) + g.points(a)) % g.points(a)) * g.stride(a);
        }
        // x + R -> lambda x + R shifts the phase by exp(-i pi k (lambda - 1)).
        out[slot] = (parity % 2 == 0 ? 1.0 : -1.0) * c[n];
    }
    return from_spectrum(g, std::move(out), f.components());
}

// ---------------------------------------------------------------- reports

bool LemmaReport::passed() const {
    if (!all_finite) return false;
    if (kind == "identity") return max_ratio <= tolerance;
    return doubling_change < 0.1;
}

nlohmann::json LemmaReport::summary() const {
    nlohmann::json j;
    j["lemma"] = id;
    j["kind"] = kind;
    j["params"] = params;
    j["samples"] = samples.size();
    j["max_ratio"] = max_ratio;
    j["mean_ratio"] = mean_ratio;
    j["q50"] = q50;
    j["q90"] = q90;
    j["q99"] = q99;
    j["all_finite"] = all_finite;
    j["witness_index"] = witness_index;
    j["witness_hash"] = witness_hash;
    if (kind == "identity")
        j["tolerance"] = tolerance;
    else {
        j["refined_max_ratio"] = refined_max_ratio;
        j["doubling_change"] = doubling_change;
    }
    j["boundary_mass"] = boundary_mass;
    j["passed"] = passed();
    return j;
}

void write_reports_ndjson(std::ostream& out, const std::vector<LemmaReport>& reports) {
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < r.samples.size(); ++i) {
            nlohmann::json j;
            j["lemma"] = r.id;
            j["sample"] = i;
            j["lhs"] = r.samples[i].lhs;
            j["rhs"] = r.samples[i].rhs;
            j["ratio"] = std::isfinite(r.ratios[i]) ? nlohmann::json(r.ratios[i]) : nlohmann::json("inf");
            out << j.dump() << '\n';
        }
        nlohmann::json s;
        s["summary"] = r.summary();
        out << s.dump() << '\n';
    }
}

void write_reports_table(std::ostream& out, const std::vector<LemmaReport>& reports) {
    out << std::left << std::setw(30) << "lemma" << std::setw(10) << "kind" << std::right << std::setw(8) << "samples"
        << std::setw(13) << "max" << std::setw(13) << "mean" << std::setw(13) << "q90" << std::setw(13) << "doubling"
        << "  status\n";
    for (const auto& r : reports) {
        out << std::left << std::setw(30) << r.id << std::setw(10) << r.kind << std::right << std::setw(8)
            << r.samples.size() << std::scientific << std::setprecision(4) << std::setw(13) << r.max_ratio
            << std::setw(13) << r.mean_ratio << std::setw(13) << r.q90 << std::setw(13)
            << (r.kind == "identity" ? 0.0 : r.doubling_change) << "  " << (r.passed() ? "ok" : "FAIL") << '\n'
            << std::defaultfloat;
    }
}

namespace {

// One sample: compute lhs/rhs on the given ensemble, filling witness inputs on request.
using SampleFn = std::function<LemmaSample(const EnsembleSpec&, int, std::vector<SpectralField>*)>;

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double pos = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

std::vector<LemmaSample> evaluate(const EnsembleSpec& ens, const SampleFn& fn) {
    std::vector<LemmaSample> out(ens.count);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = fn(ens, static_cast<int>(i), nullptr); });
    return out;
}

double ratio_of(const LemmaSample& s) {
    if (s.rhs > 0.0) return s.lhs / s.rhs;
    return s.lhs == 0.0 ? 0.0 : kInf;
}

void summarize(LemmaReport& r) {
    r.ratios.clear();
    r.all_finite = true;
    double sum = 0.0;
    r.max_ratio = 0.0;
    r.witness_index = r.samples.empty() ? -1 : 0;
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        double q = ratio_of(r.samples[i]);
        if (!std::isfinite(q) || !std::isfinite(r.samples[i].lhs) || !std::isfinite(r.samples[i].rhs))
            r.all_finite = false;
        r.ratios.push_back(q);
        sum += q;
        if (q > r.max_ratio) {
            r.max_ratio = q;
            r.witness_index = static_cast<int>(i);
        }
    }
    r.mean_ratio = r.samples.empty() ? 0.0 : sum / r.samples.size();
    r.q50 = quantile(r.ratios, 0.5);
    r.q90 = quantile(r.ratios, 0.9);
    r.q99 = quantile(r.ratios, 0.99);
}

void attach_witness(LemmaReport& r, const EnsembleSpec& ens, const SampleFn& fn) {
    if (r.witness_index < 0) return;
    fn(ens, r.witness_index, &r.witness);
    std::string bytes;
    for (const auto& f : r.witness) bytes += encode_checkpoint(f, 0.0);
    r.witness_hash = sha1_hex(bytes);
    r.params["seed"] = ens.seed;
    r.params["points"] = ens.grid.points(0);
    r.params["dim"] = ens.grid.dim();
    r.params["max_mode"] = ens.resolved_max_mode();
}

LemmaReport run_inequality(const std::string& id, nlohmann::json params, const EnsembleSpec& ens,
                           const SampleFn& fn) {
    LemmaReport r;
    r.id = id;
    r.params = std::move(params);
    r.samples = evaluate(ens, fn);
    summarize(r);
    attach_witness(r, ens, fn);
    LemmaReport fine;
    fine.samples = evaluate(ens.refined(2), fn);
    summarize(fine);
    r.refined_max_ratio = fine.max_ratio;
    if (r.max_ratio > 0.0)
        r.doubling_change = std::abs(fine.max_ratio / r.max_ratio - 1.0);
    else
        r.doubling_change = fine.max_ratio > 0.0 ? kInf : 0.0;
    if (!fine.all_finite) r.all_finite = false;
    return r;
}

LemmaReport run_identity(const std::string& id, nlohmann::json params, const EnsembleSpec& ens,
                         const SampleFn& fn) {
    LemmaReport r;
    r.id = id;
    r.kind = "identity";
    r.params = std::move(params);
    r.tolerance = kIdentityTolerance;
    r.samples = evaluate(ens, fn);
    summarize(r);
    attach_witness(r, ens, fn);
    return r;
}

void keep(std::vector<SpectralField>* w, std::initializer_list<SpectralField> fields) {
    if (w) w->assign(fields);
}

SpectralField pad(const SpectralField& f) { return upsample(f, 2); }

// Euclidean magnitude of a vector field as a one-component real field.
SpectralField magnitude(const std::vector<SpectralField>& parts) {
    SpectralField out(parts.front().grid());
    for (const auto& p : parts)
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += std::norm(p[n]);
    return out.map([](cplx v) { return cplx(std::sqrt(v.real()), 0.0); });
}

std::vector<SpectralField> gradient_parts(const SpectralField& f) {
    std::vector<SpectralField> out;
    for (int a = 0; a < f.grid().dim(); ++a) out.push_back(partial_derivative(f, a));
    return out;
}

double gradient_sobolev(const SpectralField& g, double S) {
    double s = 0.0;
    for (const auto& p : gradient_parts(g)) s += std::pow(sobolev_norm(p, S), 2);
    return std::sqrt(s);
}

void check_exponent(double p, const char* name) {
    if (!(p > 1.0)) throw ValidationError(std::string(name) + " must exceed 1");
}

}  // namespace

// ---------------------------------------------------------------- identities

std::vector<LemmaReport> verify_operator_identities(const EnsembleSpec& ens, double bessel_order) {
    if (ens.grid.dim() != 1) throw ValidationError("operator identities are checked on d = 1 grids");
    std::vector<LemmaReport> out;
    auto relative = [](const SpectralField& a, const SpectralField& b) { return LemmaSample{l2_norm(a - b), l2_norm(b)}; };
    out.push_back(run_identity("hilbert_square", {}, ens, [](const EnsembleSpec& e, int i, auto* w) {
        SpectralField f = ensemble_member(e, 0, i);
        keep(w, {f});
        return LemmaSample{l2_norm(hilbert_k(hilbert_k(f, 0), 0) + f), l2_norm(f)};
    }));
    out.push_back(run_identity("dhalf_square", {}, ens, [&](const EnsembleSpec& e, int i, auto* w) {
        SpectralField f = ensemble_member(e, 0, i);
        keep(w, {f});
        return relative(fractional_D(fractional_D(f, 0.5), 0.5), fractional_D(f, 1.0));
    }));
    out.push_back(run_identity("bessel_inverse", {{"s", bessel_order}}, ens, [&](const EnsembleSpec& e, int i, auto* w) {
        SpectralField f = ensemble_member(e, 0, i);
        keep(w, {f});
        return relative(fractional_J(fractional_J(f, -bessel_order), bessel_order), f);
    }));
    return out;
}

LemmaReport verify_Dhalf_x_identity(const EnsembleSpec& ens) {
    if (ens.grid.dim() != 1) throw ValidationError("the [D^1/2, x] identity is checked on d = 1 grids");
    if (ens.window <= 0.0 || ens.low_cut <= 0.0)
        throw ValidationError("the [D^1/2, x] identity needs a windowed band-pass ensemble");
    return run_identity("dhalf_x_commutator", {{"interior", 0.5}}, ens, [](const EnsembleSpec& e, int i, auto* w) {
        SpectralField f = ensemble_member(e, 0, i);
        keep(w, {f});
        const Grid& g = f.grid();
        SpectralField x = SpectralField::from_function(g, [](const double* p) { return cplx(p[0], 0.0); });
        SpectralField lhs = fractional_D(x * f, 0.5) - x * fractional_D(f, 0.5);
        SpectralField rhs = 0.5 * hilbert_k(fractional_D(f, -0.5), 0);
        const double cut = 0.5 * g.half_width(0);
        double err = 0.0, scale = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            if (std::abs(g.coordinates(0)[n]) > cut) continue;
            err += std::norm(lhs[n] - rhs[n]);
            scale += std::norm(rhs[n]);
        }
        return LemmaSample{std::sqrt(err), std::sqrt(scale)};
    });
}

LemmaReport verify_weight_derivative() {
    // d/dx (x / <x>) = 1 / <x>^2, by 4th-order central differences off the kink at 0.
    const std::vector<double> points{1.0, -3.0, 0.5, -0.5, 2.0, -7.5, 12.0, 40.0};
    const double h = 1e-3;
    auto f = [](double x) { return x / bracket(x); };
    LemmaReport r;
    r.id = "weight_derivative";
    r.kind = "identity";
    r.tolerance = kIdentityTolerance;
    r.params["points"] = points;
    r.params["step"] = h;
    for (double x : points) {
        double fd = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
        double exact = 1.0 / (bracket(x) * bracket(x));
        r.samples.push_back({std::abs(fd - exact), exact});
    }
    summarize(r);
    return r;
}

// ---------------------------------------------------------------- inequalities

std::vector<LemmaReport> verify_commutator_L21(const EnsembleSpec& ens, double s, double l, double S, int axis) {
    const int d = ens.grid.dim();
    if (!(S > d / 2.0)) throw ValidationError("commutator lemma needs S > d/2");
    if (s > 1.0) throw ValidationError("commutator lemma needs s <= 1");
    if (std::abs(s + l - 1.0) > 1e-12) throw ValidationError("commutator lemma needs s + l = 1");
    if (axis < 0 || axis >= d) throw ValidationError("axis out of range");
    nlohmann::json params{{"s", s}, {"l", l}, {"S", S}, {"axis", axis}};
    std::vector<LemmaReport> out;
    out.push_back(run_inequality("commutator_L21_derivative", params, ens, [=](const EnsembleSpec& e, int i, auto* w) {
        SpectralField g = ensemble_member(e, 0, i).real_part();
        SpectralField u = ensemble_member(e, 1, i);
        keep(w, {g, u});
        SpectralField G = pad(g), U = pad(u);
        SpectralField c = fractional_D(G * partial_derivative(U, axis), s) - G * partial_derivative(fractional_D(U, s), axis);
        return LemmaSample{l2_norm(c), gradient_sobolev(g, S) * sobolev_norm(u, s)};
    }));
    out.push_back(run_inequality("commutator_L21_fractional", params, ens, [=](const EnsembleSpec& e, int i, auto* w) {
        SpectralField g = ensemble_member(e, 0, i).real_part();
        SpectralField u = ensemble_member(e, 1, i);
        keep(w, {g, u});
        SpectralField G = pad(g), U = pad(u);
        SpectralField c = fractional_D(G * fractional_D(U, l), s) - G * fractional_D(U, s + l);
        return LemmaSample{l2_norm(c), gradient_sobolev(g, S) * l2_norm(u)};
    }));
    return out;
}

LemmaReport verify_calderon(const EnsembleSpec& ens, double p) {
    if (p != 2.0 && p != 4.0) throw ValidationError("Calderon check supports p in {2, 4}");
    return run_inequality("calderon_p" + std::to_string(int(p)), {{"p", p}}, ens,
                          [=](const EnsembleSpec& e, int i, auto* w) {
                              SpectralField phi = ensemble_member(e, 0, i).real_part();
                              SpectralField f = ensemble_member(e, 1, i);
                              keep(w, {phi, f});
                              SpectralField P = pad(phi), F = pad(f);
                              SpectralField c = fractional_D(P * F, 1.0) - P * fractional_D(F, 1.0);
                              return LemmaSample{lp_norm(c, p), linf_norm(magnitude(gradient_parts(P))) * lp_norm(F, p)};
                          });
}

std::vector<LemmaReport> verify_kato_ponce_fractional(const EnsembleSpec& ens, double s, const KatoPonceExponents& e) {
    const int d = ens.grid.dim();
    if (!(e.r > 0.5)) throw ValidationError("Kato-Ponce needs r > 1/2");
    for (double q : {e.p1, e.q1, e.p2, e.q2}) check_exponent(q, "Kato-Ponce exponents");
    auto inv = [](double q) { return std::isinf(q) ? 0.0 : 1.0 / q; };
    if (std::abs(inv(e.r) - inv(e.p1) - inv(e.q1)) > 1e-12 || std::abs(inv(e.r) - inv(e.p2) - inv(e.q2)) > 1e-12)
        throw ValidationError("Kato-Ponce exponents must satisfy 1/r = 1/p1 + 1/q1 = 1/p2 + 1/q2");
    bool even = s > 0 && std::abs(s / 2 - std::round(s / 2)) < 1e-12;
    if (!(s > std::max(0.0, d / e.r - d)) && !even) throw ValidationError("Kato-Ponce needs s > max(0, d/r - d)");
    nlohmann::json params{{"s", s}, {"r", e.r}, {"p1", e.p1}, {"q1", e.q1}, {"p2", e.p2}, {"q2", e.q2}};
    std::vector<LemmaReport> out;
    for (bool bessel : {false, true}) {
        auto op = [=](const SpectralField& f) { return bessel ? fractional_J(f, s) : fractional_D(f, s); };
        out.push_back(run_inequality(bessel ? "kato_ponce_J" : "kato_ponce_D", params, ens,
                                     [=](const EnsembleSpec& en, int i, auto* w) {
                                         SpectralField f = ensemble_member(en, 0, i);
                                         SpectralField g = ensemble_member(en, 1, i);
                                         keep(w, {f, g});
                                         SpectralField F = pad(f), G = pad(g);
                                         double lhs = lp_norm(op(F * G), e.r);
                                         double rhs = lp_norm(op(F), e.p1) * lp_norm(G, e.q1) +
                                                      lp_norm(F, e.p2) * lp_norm(op(G), e.q2);
                                         return LemmaSample{lhs, rhs};
                                     }));
    }
    return out;
}

std::vector<LemmaReport> verify_commutator_L23(const EnsembleSpec& ens, double s, double p, double p1, double p2) {
    check_exponent(p, "p");
    if (!(s > 0.0 && s < 1.0)) throw ValidationError("first commutator estimate needs 0 < s < 1");
    if (p2 < 0.0) p2 = std::isinf(p1) ? p : 1.0 / (1.0 / p - 1.0 / p1);
    check_exponent(p1, "p1");
    check_exponent(p2, "p2");
    auto inv = [](double q) { return std::isinf(q) ? 0.0 : 1.0 / q; };
    if (std::abs(inv(p1) + inv(p2) - 1.0 / p) > 1e-12) throw ValidationError("exponents must satisfy 1/p1 + 1/p2 = 1/p");
    std::vector<LemmaReport> out;
    out.push_back(run_inequality("commutator_L23_D", {{"s", s}, {"p", p}}, ens, [=](const EnsembleSpec& e, int i, auto* w) {
        SpectralField f = ensemble_member(e, 0, i);
        SpectralField g = ensemble_member(e, 1, i);
        keep(w, {f, g});
        SpectralField F = pad(f), G = pad(g);
        SpectralField c = fractional_D(F * G, s) - G * fractional_D(F, s);
        return LemmaSample{lp_norm(c, p), lp_norm(F, p) * linf_norm(fractional_D(G, s))};
    }));
    out.push_back(run_inequality("commutator_L23_J", {{"s", s}, {"p", p}, {"p1", p1}, {"p2", p2}}, ens,
                                 [=](const EnsembleSpec& e, int i, auto* w) {
                                     SpectralField f = ensemble_member(e, 0, i);
                                     SpectralField g = ensemble_member(e, 1, i);
                                     keep(w, {f, g});
                                     SpectralField F = pad(f), G = pad(g);
                                     SpectralField c = fractional_J(F * G, s) - F * fractional_J(G, s);
                                     std::vector<SpectralField> grad;
                                     for (auto& part : gradient_parts(F)) grad.push_back(fractional_J(part, s - 1.0));
                                     return LemmaSample{lp_norm(c, p), lp_norm(magnitude(grad), p1) * lp_norm(G, p2)};
                                 }));
    return out;
}

LemmaReport verify_bmo_embedding(const EnsembleSpec& ens) {
    const double order = ens.grid.dim() / 2.0;
    return run_inequality("bmo_embedding", {{"order", order}}, ens, [=](const EnsembleSpec& e, int i, auto* w) {
        SpectralField u = ensemble_member(e, 0, i);
        keep(w, {u});
        return LemmaSample{bmo_norm(u), sobolev_norm(u, order, true)};
    });
}

namespace {

double gradient_bmo(const SpectralField& f) {
    double s = 0.0;
    for (const auto& p : gradient_parts(f)) s += std::pow(bmo_norm(p), 2);
    return std::sqrt(s);
}

LemmaSample interpolation_sample(const SpectralField& f) {
    return LemmaSample{bmo_norm(fractional_D(f, 0.5)), std::sqrt(bmo_norm(f) * gradient_bmo(f))};
}

// x_0 / <x_0> tapered to zero before the box edge so it is smooth and periodic.
SpectralField tapered_weight(const Grid& g) {
    const double L = 0.6 * g.half_width(0);
    return SpectralField::from_function(g, [L](const double* x) {
        return cplx(x[0] / bracket(x[0]) * std::exp(-std::pow(x[0] / L, 12)), 0.0);
    });
}

}  // namespace

std::vector<LemmaReport> verify_interpolation(const EnsembleSpec& ens) {
    std::vector<LemmaReport> out;
    out.push_back(run_inequality("interpolation", {}, ens, [](const EnsembleSpec& e, int i, auto* w) {
        SpectralField f = ensemble_member(e, 0, i).real_part();
        keep(w, {f});
        return interpolation_sample(f);
    }));
    EnsembleSpec single = ens;
    single.count = 1;
    out.push_back(run_inequality("interpolation_weight", {{"taper", 0.6}}, single, [](const EnsembleSpec& e, int, auto* w) {
        SpectralField f = tapered_weight(e.grid);
        keep(w, {f});
        return interpolation_sample(f);
    }));
    return out;
}

LemmaReport verify_halving(const EnsembleSpec& ens, int axis) {
    const int d = ens.grid.dim();
    if (d < 2) throw ValidationError("the halving lemma is checked for d >= 2");
    if (axis < 0 || axis >= d) throw ValidationError("axis out of range");
    if (ens.window <= 0.0) throw ValidationError("the halving lemma needs a windowed ensemble");
    return run_inequality("halving", {{"axis", axis}}, ens, [=](const EnsembleSpec& e, int i, auto* wit) {
        const Grid& g = e.grid;
        SpectralField u = ensemble_member(e, 0, i);
        SpectralField w = ensemble_member(e, 1, i);
        EnsembleSpec line = e;
        line.grid = Grid(1, g.points(axis), g.half_width(axis));
        SpectralField v = ensemble_member(line, 2, i).real_part();
        keep(wit, {u, w, v});

        std::vector<double> vp(g.points(axis));
        for (int j = 0; j < g.points(axis); ++j) vp[j] = v[j].real();
        auto V = cumulative_integral(vp, g.half_width(axis));
        SpectralField prod = w * partial_derivative(u, axis);
        cplx lhs(0.0, 0.0);
        for (std::size_t n = 0; n < g.size(); ++n) lhs += prod[n] * V[(n / g.stride(axis)) % g.points(axis)];
        lhs *= g.cell_volume();
        const double du = l2_norm(fractional_Dk(u, axis, 0.5));
        const double rhs = du * l2_norm(fractional_Dk(w, axis, 0.5)) * integral_abs(v) + du * l2_norm(w) * l2_norm(v);
        return LemmaSample{std::abs(lhs), rhs};
    });
}

std::vector<LemmaReport> verify_weight_lemma(const EnsembleSpec& ens, int N, const MultiIndex& gamma) {
    if (N < 1) throw ValidationError("weight lemma needs N >= 1");
    if (gamma.dim != ens.grid.dim()) throw ValidationError("gamma dimension differs from the grid");
    const int order = gamma.total();
    const int M = 2 * N * (order + 1);
    const double s = order + 0.5;
    const int Ms = 2 * N * (static_cast<int>(std::ceil(s)) + 1);

    double worst = 0.0;
    for (int i = 0; i < ens.count; ++i) worst = std::max(worst, boundary_mass_fraction(ensemble_member(ens, 0, i)));
    if (worst > kDefaultBoundaryFraction)
        throw ValidationError("weight lemma ensemble carries boundary mass " + std::to_string(worst));

    auto radial = [](const SpectralField& f, double power) {
        const Grid& g = f.grid();
        double acc = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            auto idx = g.unravel(n);
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) r2 += std::pow(g.coordinates(a)[idx[a]], 2);
            acc += std::pow(r2, power / 2.0) * std::norm(f[n]);
        }
        return acc * g.cell_volume();
    };
    std::vector<LemmaReport> out;
    out.push_back(run_inequality("weight_lemma_derivative", {{"N", N}, {"gamma", gamma.label()}, {"M", M}}, ens,
                                 [=](const EnsembleSpec& e, int i, auto* w) {
                                     SpectralField phi = ensemble_member(e, 0, i);
                                     keep(w, {phi});
                                     double lhs = radial(multi_derivative(phi, gamma), 2.0 * N);
                                     double rhs = sobolev_norm(phi, order + 1) * std::sqrt(radial(phi, 2.0 * M));
                                     return LemmaSample{lhs, rhs};
                                 }));
    out.push_back(run_inequality("weight_lemma_bessel", {{"N", N}, {"s", s}, {"M", Ms}}, ens,
                                 [=](const EnsembleSpec& e, int i, auto* w) {
                                     SpectralField phi = ensemble_member(e, 0, i);
                                     keep(w, {phi});
                                     double lhs = radial(fractional_J(phi, s), 2.0 * N);
                                     double rhs = sobolev_norm(phi, s + 1) * std::sqrt(radial(phi, 2.0 * Ms));
                                     return LemmaSample{lhs, rhs};
                                 }));
    for (auto& r : out) r.boundary_mass = worst;
    return out;
}

// ---------------------------------------------------------------- suites

std::vector<std::string> lemma_suite_names() {
    return {"identities", "commutator", "calderon", "kato-ponce", "commutator-L23",
            "bmo",        "interpolation", "halving", "weight"};
}

std::vector<LemmaReport> run_lemma_suite(const std::string& name, const SuiteOptions& o) {
    EnsembleSpec base;
    base.count = o.count;
    base.seed = o.seed;
    base.grid = Grid(1, o.points, 16.0);
    std::vector<LemmaReport> out;
    auto append = [&](std::vector<LemmaReport> more) {
        for (auto& r : more) out.push_back(std::move(r));
    };
    if (name == "identities") {
        EnsembleSpec band = base;
        band.low_cut = 0.7;
        append(verify_operator_identities(band));
        // Window narrow enough to vanish at the edge, band gap wide enough that its
        // spectral tail never reaches the excluded low modes.
        EnsembleSpec windowed = band;
        windowed.window = 1.0 / 7.0;
        out.push_back(verify_Dhalf_x_identity(windowed));
        out.push_back(verify_weight_derivative());
    } else if (name == "commutator") {
        append(verify_commutator_L21(base, 0.5, 0.5, 1.0));
    } else if (name == "calderon") {
        out.push_back(verify_calderon(base, 2.0));
        out.push_back(verify_calderon(base, 4.0));
    } else if (name == "kato-ponce") {
        append(verify_kato_ponce_fractional(base, 1.5));
    } else if (name == "commutator-L23") {
        append(verify_commutator_L23(base, 0.5, 2.0));
    } else if (name == "bmo") {
        out.push_back(verify_bmo_embedding(base));
    } else if (name == "interpolation") {
        append(verify_interpolation(base));
    } else if (name == "halving") {
        EnsembleSpec plane = base;
        plane.grid = Grid(2, o.points, 16.0);
        plane.window = 0.25;
        out.push_back(verify_halving(plane));
    } else if (name == "weight") {
        EnsembleSpec decaying = base;
        decaying.window = 0.125;
        append(verify_weight_lemma(decaying, 1, MultiIndex::unit(1, 0)));
    } else {
        throw ValidationError("unknown lemma suite '" + name + "'");
    }
    return out;
}

}  // namespace qnls
