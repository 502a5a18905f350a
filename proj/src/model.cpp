#include "qnls/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qnls/errors.hpp"
#include "qnls/operators.hpp"

namespace qnls {

std::string to_string(Form f) { return f == Form::divergence ? "divergence" : "nondivergence"; }
std::string to_string(InteractionClass c) { return c == InteractionClass::quadratic ? "quadratic" : "cubic"; }

Form parse_form(const std::string& s) {
    if (s == "divergence") return Form::divergence;
    if (s == "nondivergence") return Form::nondivergence;
    throw ValidationError("model.form must be \"divergence\" or \"nondivergence\", got \"" + s + "\"");
}

InteractionClass parse_class(const std::string& s) {
    if (s == "quadratic") return InteractionClass::quadratic;
    if (s == "cubic") return InteractionClass::cubic;
    throw ValidationError("model.class must be \"quadratic\" or \"cubic\", got \"" + s + "\"");
}

namespace {

RealMatrix zero_matrix() { return RealMatrix{}; }

RealMatrix scaled_identity(double v, int d) {
    RealMatrix m{};
    for (int i = 0; i < d; ++i) m[i][i] = v;
    return m;
}

ComplexMatrix scaled_identity(cplx v, int d) {
    ComplexMatrix m{};
    for (int i = 0; i < d; ++i) m[i][i] = v;
    return m;
}

SignatureSpec signature(int dim, int positive_count) {
    if (dim < 1 || dim > kMaxDim) throw ValidationError("model dimension must be 1, 2 or 3");
    if (positive_count < 0) positive_count = dim;
    if (positive_count < 1 || positive_count > dim)
        throw ValidationError("signature positive_count must lie in [1, d]");
    return {dim, positive_count};
}

void set_zero_metric(ModelProblem& m) {
    m.metric.h = [](const PointState&) { return zero_matrix(); };
    m.metric.h_y = [](const PointState&) { return ComplexMatrix{}; };
    m.metric.identically_zero = true;
}

void set_zero_nonlinearity(ModelProblem& m) {
    auto zero = [](const PointState&) { return cplx(0.0, 0.0); };
    auto zero_vec = [](const PointState&) { return std::array<cplx, kMaxDim>{}; };
    m.nonlinearity.F = zero;
    m.nonlinearity.F_y = zero;
    m.nonlinearity.F_ybar = zero;
    m.nonlinearity.F_z = zero_vec;
    m.nonlinearity.F_zbar = zero_vec;
    m.nonlinearity.identically_zero = true;
}

double matrix_size(const RealMatrix& m, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s = std::max(s, std::abs(m[i][j]));
    return s;
}

PointState scaled(const PointState& p, double a) {
    PointState q = p;
    q.y *= a;
    for (auto& z : q.z) z *= a;
    return q;
}

std::vector<PointState> sample_points(int d, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 0.5);
    std::vector<PointState> pts(count);
    for (auto& p : pts) {
        p.y = cplx(nd(rng), nd(rng));
        for (int k = 0; k < d; ++k) p.z[k] = cplx(nd(rng), nd(rng));
    }
    return pts;
}

// Wirtinger derivative by central differences: d/dw = (d/dRe - i d/dIm) / 2.
template <typename Fn>
cplx wirtinger(Fn&& f, PointState& p, cplx* slot, double step) {
    const cplx base = *slot;
    *slot = base + step;
    cplx fr_p = f(p);
    *slot = base - step;
    cplx fr_m = f(p);
    *slot = base + cplx(0.0, step);
    cplx fi_p = f(p);
    *slot = base - cplx(0.0, step);
    cplx fi_m = f(p);
    *slot = base;
    cplx dre = (fr_p - fr_m) / (2.0 * step);
    cplx dim = (fi_p - fi_m) / (2.0 * step);
    return 0.5 * (dre - cplx(0.0, 1.0) * dim);
}

}  // namespace

ModelCheckReport register_model(const ModelProblem& model) {
    ModelCheckReport report;
    const int d = model.dim();
    if (model.components != 1) throw ValidationError("models are scalar (components = 1)");
    if (model.metric.interaction_order + 1 != model.nonlinearity.interaction_order)
        throw ValidationError("model " + model.name + ": metric order + 1 must equal nonlinearity order");
    if (model.metric.depends_on_gradient && model.form == Form::divergence)
        throw ValidationError("model " + model.name + ": gradient-dependent metric requires nondivergence form");
    if (model.conjugate_coefficient && model.form == Form::divergence)
        throw ValidationError("model " + model.name + ": conjugate coupling requires nondivergence form");

    auto pts = sample_points(d, 32, 20240611u);
    // Symmetry.
    for (const auto& p : pts) {
        RealMatrix h = model.metric.h(p);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (!std::isfinite(h[i][j])) throw ValidationError("model " + model.name + ": non-finite metric");
                report.max_asymmetry = std::max(report.max_asymmetry, std::abs(h[i][j] - h[j][i]));
            }
    }
    if (report.max_asymmetry > 1e-14)
        throw ValidationError("model " + model.name + ": metric perturbation h is not symmetric");

    // Order scaling at amplitude 1e-3 against 5e-4.
    const double a = 1e-3;
    double worst_metric = 1.0, worst_F = 1.0;
    for (const auto& p : pts) {
        if (!model.metric.identically_zero) {
            double big = matrix_size(model.metric.h(scaled(p, a)), d);
            double small = matrix_size(model.metric.h(scaled(p, a / 2)), d);
            if (big > 0.0) {
                double r = small / big * std::pow(2.0, model.metric.interaction_order);
                if (std::abs(r - 1.0) > std::abs(worst_metric - 1.0)) worst_metric = r;
            }
        }
        if (!model.nonlinearity.identically_zero) {
            double big = std::abs(model.nonlinearity.F(scaled(p, a)));
            double small = std::abs(model.nonlinearity.F(scaled(p, a / 2)));
            if (big > 0.0) {
                double r = small / big * std::pow(2.0, model.nonlinearity.interaction_order);
                if (std::abs(r - 1.0) > std::abs(worst_F - 1.0)) worst_F = r;
            }
        }
    }
    report.metric_scaling = worst_metric;
    report.nonlinearity_scaling = worst_F;
    if (std::abs(worst_metric - 1.0) > 0.2)
        throw ValidationError("model " + model.name + ": metric does not vanish at the declared order");
    if (std::abs(worst_F - 1.0) > 0.2)
        throw ValidationError("model " + model.name + ": nonlinearity does not vanish at the declared order");

    // Registered derivatives against central differences.
    const double step = 1e-5;
    double worst = 0.0;
    for (auto p : pts) {
        const auto& nl = model.nonlinearity;
        auto F = [&](const PointState& q) { return nl.F(q); };
        std::vector<std::pair<cplx, cplx>> pairs;
        {
            PointState q = p;
            pairs.emplace_back(wirtinger(F, q, &q.y, step), nl.F_y(p));
            PointState r = p;
            // d/d ybar = conj of d/dy applied to conj(F): use the conjugate slot trick.
            auto Fc = [&](const PointState& s) { return std::conj(nl.F(s)); };
            pairs.emplace_back(std::conj(wirtinger(Fc, r, &r.y, step)), nl.F_ybar(p));
            auto fz = nl.F_z(p);
            auto fzb = nl.F_zbar(p);
            for (int k = 0; k < d; ++k) {
                PointState s = p;
                pairs.emplace_back(wirtinger(F, s, &s.z[k], step), fz[k]);
                PointState t = p;
                pairs.emplace_back(std::conj(wirtinger(Fc, t, &t.z[k], step)), fzb[k]);
            }
        }
        {
            auto hy = model.metric.h_y(p);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    auto hij = [&](const PointState& q) { return cplx(model.metric.h(q)[i][j], 0.0); };
                    PointState q = p;
                    pairs.emplace_back(wirtinger(hij, q, &q.y, step), hy[i][j]);
                }
        }
        double scale = 1e-12;
        for (auto& [num, reg] : pairs) scale = std::max({scale, std::abs(num), std::abs(reg)});
        for (auto& [num, reg] : pairs) worst = std::max(worst, std::abs(num - reg) / scale);
    }
    report.max_derivative_error = worst;
    if (worst > 1e-6)
        throw ValidationError("model " + model.name + ": registered derivatives disagree with finite differences (" +
                              std::to_string(worst) + ")");
    return report;
}

std::vector<std::string> builtin_model_names() { return {"free", "toy-quadratic", "toy-cubic", "dbhs", "smcf"}; }

ModelProblem builtin_model(const std::string& name, int dim, int positive_count) {
    ModelProblem m;
    m.name = name;
    m.metric.g0 = signature(dim, positive_count);
    const int d = dim;
    if (name == "free") {
        set_zero_metric(m);
        set_zero_nonlinearity(m);
        m.metric.interaction_order = 1;
        m.nonlinearity.interaction_order = 2;
    } else if (name == "toy-quadratic") {
        m.metric.h = [d](const PointState& p) { return scaled_identity(p.y.real(), d); };
        m.metric.h_y = [d](const PointState&) { return scaled_identity(cplx(0.5, 0.0), d); };
        m.metric.interaction_order = 1;
        auto& nl = m.nonlinearity;
        nl.F = [d](const PointState& p) {
            cplx s(0.0, 0.0);
            for (int k = 0; k < d; ++k) s += p.z[k] * p.z[k];
            return s;
        };
        nl.F_y = [](const PointState&) { return cplx(0.0, 0.0); };
        nl.F_ybar = nl.F_y;
        nl.F_z = [d](const PointState& p) {
            std::array<cplx, kMaxDim> r{};
            for (int k = 0; k < d; ++k) r[k] = 2.0 * p.z[k];
            return r;
        };
        nl.F_zbar = [](const PointState&) { return std::array<cplx, kMaxDim>{}; };
        nl.interaction_order = 2;
    } else if (name == "toy-cubic") {
        m.metric.h = [d](const PointState& p) { return scaled_identity(std::norm(p.y), d); };
        m.metric.h_y = [d](const PointState& p) { return scaled_identity(std::conj(p.y), d); };
        m.metric.interaction_order = 2;
        auto& nl = m.nonlinearity;
        auto grad2 = [d](const PointState& p) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += std::norm(p.z[k]);
            return s;
        };
        nl.F = [grad2](const PointState& p) { return grad2(p) * p.z[0]; };
        nl.F_y = [](const PointState&) { return cplx(0.0, 0.0); };
        nl.F_ybar = nl.F_y;
        nl.F_z = [d, grad2](const PointState& p) {
            std::array<cplx, kMaxDim> r{};
            for (int k = 0; k < d; ++k) r[k] = std::conj(p.z[k]) * p.z[0];
            r[0] += grad2(p);
            return r;
        };
        nl.F_zbar = [d](const PointState& p) {
            std::array<cplx, kMaxDim> r{};
            for (int k = 0; k < d; ++k) r[k] = p.z[k] * p.z[0];
            return r;
        };
        nl.interaction_order = 3;
    } else if (name == "dbhs") {
        // i u_t + (1 - 2|u|^2) Lap u - 2 u^2 Lap(conj u) = 4 u |grad u|^2 - u |u|^2,
        // the expansion of  u_t = i Lap u - 2 i u Lap(|u|^2) + i u |u|^2.
        m.form = Form::nondivergence;
        m.metric.h = [d](const PointState& p) { return scaled_identity(-2.0 * std::norm(p.y), d); };
        m.metric.h_y = [d](const PointState& p) { return scaled_identity(-2.0 * std::conj(p.y), d); };
        m.metric.interaction_order = 2;
        m.conjugate_coefficient = [](const PointState& p) { return -2.0 * p.y * p.y; };
        auto& nl = m.nonlinearity;
        auto grad2 = [d](const PointState& p) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += std::norm(p.z[k]);
            return s;
        };
        nl.F = [grad2](const PointState& p) { return 4.0 * p.y * grad2(p) - p.y * std::norm(p.y); };
        nl.F_y = [grad2](const PointState& p) { return cplx(4.0 * grad2(p) - 2.0 * std::norm(p.y), 0.0); };
        nl.F_ybar = [](const PointState& p) { return -p.y * p.y; };
        nl.F_z = [d](const PointState& p) {
            std::array<cplx, kMaxDim> r{};
            for (int k = 0; k < d; ++k) r[k] = 4.0 * p.y * std::conj(p.z[k]);
            return r;
        };
        nl.F_zbar = [d](const PointState& p) {
            std::array<cplx, kMaxDim> r{};
            for (int k = 0; k < d; ++k) r[k] = 4.0 * p.y * p.z[k];
            return r;
        };
        nl.interaction_order = 3;
    } else if (name == "smcf") {
        // Conjugated graph model: i psi_t + (delta_ij - Re(z_i conj z_j)/(1+|z|^2)) psi_ij = 0.
        m.form = Form::nondivergence;
        m.metric.depends_on_gradient = true;
        m.metric.h = [d](const PointState& p) {
            double q = 1.0;
            for (int k = 0; k < d; ++k) q += std::norm(p.z[k]);
            RealMatrix h{};
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) h[i][j] = -(p.z[i] * std::conj(p.z[j])).real() / q;
            return h;
        };
        m.metric.h_y = [](const PointState&) { return ComplexMatrix{}; };
        m.metric.interaction_order = 2;
        set_zero_nonlinearity(m);
        m.nonlinearity.identically_zero = true;
        m.nonlinearity.interaction_order = 3;
    } else {
        std::string known;
        for (auto& n : builtin_model_names()) known += (known.empty() ? "" : ", ") + n;
        throw ValidationError("unknown model \"" + name + "\" (known: " + known + ")");
    }
    register_model(m);
    return m;
}

ModelProblem custom_model(const CustomModelSpec& spec) {
    ModelProblem m;
    m.name = spec.name;
    m.form = spec.form;
    m.metric.g0 = signature(spec.dim, spec.positive_count);
    const int d = spec.dim;
    m.metric.interaction_order = spec.interaction == InteractionClass::quadratic ? 1 : 2;
    m.nonlinearity.interaction_order = m.metric.interaction_order + 1;

    std::array<std::array<Expression, kMaxDim>, kMaxDim> h;
    bool any_metric = false, uses_gradient = false;
    for (const auto& [key, text] : spec.metric) {
        Expression e = Expression::parse(text);
        if (key == "h") {
            for (int i = 0; i < d; ++i) h[i][i] = e;
        } else if (key.size() == 2 && key[0] >= '1' && key[0] <= '0' + d && key[1] >= '1' && key[1] <= '0' + d) {
            h[key[0] - '1'][key[1] - '1'] = e;
        } else {
            throw ValidationError("model.metric key \"" + key + "\" must be \"h\" or an index pair like \"12\"");
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (h[i][j].is_zero()) continue;
            any_metric = true;
            for (int k = 0; k < d; ++k)
                uses_gradient = uses_gradient || !h[i][j].derivative(Expression::du(k)).is_zero() ||
                                !h[i][j].derivative(Expression::dubar(k)).is_zero();
        }
    // An off-diagonal entry given once applies to both (i,j) and (j,i).
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (h[i][j].is_zero() && !h[j][i].is_zero()) h[i][j] = h[j][i];

    if (any_metric) {
        std::array<std::array<Expression, kMaxDim>, kMaxDim> hy;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) hy[i][j] = h[i][j].derivative(Expression::kU);
        m.metric.h = [h, d](const PointState& p) {
            RealMatrix r{};
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) r[i][j] = h[i][j].evaluate(p).real();
            return r;
        };
        m.metric.h_y = [hy, d](const PointState& p) {
            ComplexMatrix r{};
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) r[i][j] = hy[i][j].evaluate(p);
            return r;
        };
        m.metric.depends_on_gradient = uses_gradient;
        // Reality check on samples.
        for (const auto& p : sample_points(d, 16, 7u))
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    if (std::abs(h[i][j].evaluate(p).imag()) > 1e-12 * (1.0 + std::abs(h[i][j].evaluate(p))))
                        throw ValidationError("model.metric entry " + std::to_string(i + 1) + std::to_string(j + 1) +
                                              " is not real-valued");
    } else {
        set_zero_metric(m);
    }

    Expression F = Expression::parse(spec.nonlinearity);
    if (F.is_zero()) {
        int order = m.nonlinearity.interaction_order;
        set_zero_nonlinearity(m);
        m.nonlinearity.interaction_order = order;
    } else {
        Expression Fy = F.derivative(Expression::kU), Fyb = F.derivative(Expression::kUbar);
        std::array<Expression, kMaxDim> Fz, Fzb;
        for (int k = 0; k < d; ++k) {
            Fz[k] = F.derivative(Expression::du(k));
            Fzb[k] = F.derivative(Expression::dubar(k));
        }
        auto& nl = m.nonlinearity;
        nl.F = [F](const PointState& p) { return F.evaluate(p); };
        nl.F_y = [Fy](const PointState& p) { return Fy.evaluate(p); };
        nl.F_ybar = [Fyb](const PointState& p) { return Fyb.evaluate(p); };
        nl.F_z = [Fz, d](const PointState& p) {
            std::array<cplx, kMaxDim> r{};
            for (int k = 0; k < d; ++k) r[k] = Fz[k].evaluate(p);
            return r;
        };
        nl.F_zbar = [Fzb, d](const PointState& p) {
            std::array<cplx, kMaxDim> r{};
            for (int k = 0; k < d; ++k) r[k] = Fzb[k].evaluate(p);
            return r;
        };
    }
    register_model(m);
    return m;
}

// ---------------------------------------------------------------------------

std::array<SpectralField, kMaxDim> gradient(const SpectralField& phi) {
    Spectrum s(phi);
    std::array<SpectralField, kMaxDim> out;
    for (int k = 0; k < phi.grid().dim(); ++k) out[k] = s.partial(k);
    return out;
}

namespace {

struct PointwiseInputs {
    SpectralField phi;
    std::array<SpectralField, kMaxDim> grad;
    PointState at(std::size_t i, int d) const {
        PointState p;
        p.y = phi[i];
        for (int k = 0; k < d; ++k) p.z[k] = grad[k][i];
        return p;
    }
};

PointwiseInputs inputs(const SpectralField& phi) {
    if (phi.components() != 1) throw ValidationError("model evaluation expects a scalar field");
    return {phi, gradient(phi)};
}

}  // namespace

MetricField evaluate_perturbation(const ModelProblem& model, const SpectralField& phi) {
    const Grid& g = phi.grid();
    const int d = g.dim();
    if (d != model.dim()) throw ValidationError("model dimension does not match the grid");
    MetricField out;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.entries[i][j] = SpectralField(g);
    if (model.metric.identically_zero) return out;
    PointwiseInputs in = model.metric.depends_on_gradient ? inputs(phi) : PointwiseInputs{phi, {}};
    for (std::size_t n = 0; n < g.size(); ++n) {
        PointState p;
        p.y = phi[n];
        if (model.metric.depends_on_gradient)
            for (int k = 0; k < d; ++k) p.z[k] = in.grad[k][n];
        RealMatrix h = model.metric.h(p);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out.entries[i][j][n] = h[i][j];
    }
    return out;
}

MetricField evaluate_metric(const ModelProblem& model, const SpectralField& phi) {
    MetricField out = evaluate_perturbation(model, phi);
    const int d = phi.grid().dim();
    for (int i = 0; i < d; ++i) {
        const double g0 = model.metric.g0.entry(i);
        for (auto& v : out.entries[i][i].values()) v += g0;
    }
    return out;
}

SpectralField evaluate_F(const ModelProblem& model, const SpectralField& phi) {
    const Grid& g = phi.grid();
    SpectralField out(g);
    if (model.nonlinearity.identically_zero) return out;
    PointwiseInputs in = inputs(phi);
    for (std::size_t n = 0; n < g.size(); ++n) out[n] = model.nonlinearity.F(in.at(n, g.dim()));
    return out;
}

FDerivativeFields evaluate_F_derivatives(const ModelProblem& model, const SpectralField& phi) {
    const Grid& g = phi.grid();
    const int d = g.dim();
    FDerivativeFields out{SpectralField(g), SpectralField(g), {}, {}};
    for (int k = 0; k < d; ++k) {
        out.F_z[k] = SpectralField(g);
        out.F_zbar[k] = SpectralField(g);
    }
    if (model.nonlinearity.identically_zero) return out;
    PointwiseInputs in = inputs(phi);
    const auto& nl = model.nonlinearity;
    for (std::size_t n = 0; n < g.size(); ++n) {
        PointState p = in.at(n, d);
        out.F_y[n] = nl.F_y(p);
        out.F_ybar[n] = nl.F_ybar(p);
        auto fz = nl.F_z(p);
        auto fzb = nl.F_zbar(p);
        for (int k = 0; k < d; ++k) {
            out.F_z[k][n] = fz[k];
            out.F_zbar[k][n] = fzb[k];
        }
    }
    return out;
}

SpectralField principal_operator(const ModelProblem& model, const SpectralField& phi) {
    const auto& sig = model.metric.g0;
    Multiplier m{[sig](const Frequency& xi) {
                     double q = 0.0;
                     for (int a = 0; a < sig.dim; ++a) q += sig.entry(a) * xi[a] * xi[a];
                     return cplx(-q, 0.0);
                 },
                 std::nullopt};
    return apply_multiplier(phi, m);
}

SpectralField perturbation_operator(const ModelProblem& model, const SpectralField& phi, bool dealiased) {
    const Grid& g = phi.grid();
    const int d = g.dim();
    if (model.metric.identically_zero && !model.conjugate_coefficient) return SpectralField(g);
    Spectrum spec(phi);
    std::array<SpectralField, kMaxDim> grad;
    for (int k = 0; k < d; ++k) grad[k] = spec.partial(k);
    MetricField h = evaluate_perturbation(model, phi);
    std::vector<cplx> acc(g.size(), cplx(0.0, 0.0));
    if (model.form == Form::divergence) {
        for (int i = 0; i < d; ++i) {
            std::vector<cplx> flux(g.size(), cplx(0.0, 0.0));
            for (int j = 0; j < d; ++j)
                for (std::size_t n = 0; n < g.size(); ++n) flux[n] += h.entries[i][j][n] * grad[j][n];
            forward_transform(g, flux.data());
            for (std::size_t n = 0; n < g.size(); ++n) {
                auto idx = g.unravel(n);
                acc[n] += cplx(0.0, g.frequencies(i)[idx[i]]) * flux[n];
            }
        }
    } else {
        std::vector<cplx> term(g.size(), cplx(0.0, 0.0));
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                SpectralField second = spec.derivative(MultiIndex::unit(d, i).plus(j));
                const double mult = i == j ? 1.0 : 2.0;
                for (std::size_t n = 0; n < g.size(); ++n) term[n] += mult * h.entries[i][j][n] * second[n];
            }
        if (model.conjugate_coefficient) {
            SpectralField lap_conj = laplacian(phi.conj());
            for (std::size_t n = 0; n < g.size(); ++n) {
                PointState p;
                p.y = phi[n];
                term[n] += model.conjugate_coefficient(p) * lap_conj[n];
            }
        }
        forward_transform(g, term.data());
        acc = std::move(term);
    }
    if (dealiased)
        for (std::size_t n = 0; n < g.size(); ++n)
            if (!dealias_keeps(g, g.unravel(n))) acc[n] = 0.0;
    return from_spectrum(g, std::move(acc));
}

SpectralField spatial_operator(const ModelProblem& model, const SpectralField& phi, bool dealiased) {
    return principal_operator(model, phi) + perturbation_operator(model, phi, dealiased);
}

}  // namespace qnls
