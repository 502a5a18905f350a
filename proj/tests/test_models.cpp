#include <doctest.h>

#include <cmath>
#include <random>

#include "qnls/errors.hpp"
#include "qnls/model.hpp"
#include "qnls/norms.hpp"
#include "qnls/operators.hpp"

using namespace qnls;

namespace {

double rel_err(const SpectralField& a, const SpectralField& b) {
    double s = l2_norm(b);
    return l2_norm(a - b) / (s > 0.0 ? s : 1.0);
}

// Smooth field with modes |m| <= top on every axis, so quadratic products stay
// below the Nyquist band when top < n/4.
SpectralField band_field(const Grid& g, int top, double amplitude, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<std::pair<std::array<int, 2>, cplx>> terms;
    for (int a = -top; a <= top; ++a)
        for (int b = (g.dim() > 1 ? -top : 0); b <= (g.dim() > 1 ? top : 0); ++b)
            terms.push_back({{a, b}, cplx(n01(rng), n01(rng)) / double(1 + a * a + b * b)});
    return SpectralField::from_function(g, [&](const double* x) {
        cplx s(0.0, 0.0);
        for (const auto& [m, c] : terms) {
            double phase = M_PI * m[0] * x[0] / g.half_width(0);
            if (g.dim() > 1) phase += M_PI * m[1] * x[1] / g.half_width(1);
            s += c * std::exp(cplx(0.0, phase));
        }
        return amplitude * s;
    });
}

double sup_entry(const MetricField& h, int d) {
    double m = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m = std::max(m, h.entries[i][j].max_abs());
    return m;
}

}  // namespace

TEST_CASE("metric: zero data gives g0, identity model gives I") {
    Grid g(2, 16, 3.0);
    SpectralField zero(g);
    for (const auto& name : builtin_model_names()) {
        auto m = builtin_model(name, 2, 1);
        auto metric = evaluate_metric(m, zero);
        CHECK(metric.entries[0][0].max_abs() == doctest::Approx(1.0));
        CHECK(metric.entries[1][1].component(0)[5] == cplx(-1.0, 0.0));
        CHECK(metric.entries[0][1].max_abs() == 0.0);
    }
    auto free = builtin_model("free", 2);
    auto metric = evaluate_metric(free, band_field(g, 2, 0.3, 1));
    CHECK(metric.entries[1][1].max_abs() == 1.0);
    CHECK(metric.entries[1][0].max_abs() == 0.0);
}

TEST_CASE("cubic metric perturbation scales quadratically with amplitude") {
    Grid g(1, 64, 5.0);
    auto m = builtin_model("toy-cubic", 1);
    auto shape = band_field(g, 4, 1.0, 3);
    double big = sup_entry(evaluate_perturbation(m, 1e-2 * shape), 1);
    double small = sup_entry(evaluate_perturbation(m, 5e-3 * shape), 1);
    CHECK(big / small == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("constant-coefficient spatial operator is the signed Laplacian") {
    Grid g(2, 32, 4.0);
    auto phi = band_field(g, 5, 1.0, 4);
    auto elliptic = builtin_model("free", 2);
    CHECK(rel_err(spatial_operator(elliptic, phi), laplacian(phi)) < 1e-10);
    auto ultra = builtin_model("free", 2, 1);
    auto expected = multi_derivative(phi, MultiIndex(2, {2, 0, 0})) - multi_derivative(phi, MultiIndex(2, {0, 2, 0}));
    CHECK(rel_err(spatial_operator(ultra, phi), expected) < 1e-12);
}

TEST_CASE("divergence and nondivergence forms differ by (d_i g^ij) phi_j") {
    Grid g(2, 64, 4.0);
    auto phi = band_field(g, 6, 0.2, 5);
    CustomModelSpec spec;
    spec.dim = 2;
    spec.metric = {{"11", "u + ubar"}, {"12", "0.5*(u + ubar)"}, {"22", "I*(u - ubar)"}};
    spec.form = Form::divergence;
    auto div = custom_model(spec);
    spec.form = Form::nondivergence;
    auto nondiv = custom_model(spec);
    auto h = evaluate_perturbation(div, phi);
    auto grad = gradient(phi);
    SpectralField correction(g);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) correction = correction + partial_derivative(h.entries[i][j], i) * grad[j];
    auto lhs = spatial_operator(div, phi, false) - spatial_operator(nondiv, phi, false);
    CHECK(rel_err(lhs, correction) < 1e-10);
}

TEST_CASE("nonlinearity: vanishing at zero, gradient model derivatives, finite differences") {
    Grid g(1, 64, 5.0);
    SpectralField zero(g);
    for (const char* name : {"toy-quadratic", "toy-cubic"}) {
        auto m = builtin_model(name, 1);
        CHECK(evaluate_F(m, zero).max_abs() == 0.0);
        auto dF = evaluate_F_derivatives(m, zero);
        CHECK(dF.F_y.max_abs() == 0.0);
        CHECK(dF.F_ybar.max_abs() == 0.0);
        CHECK(dF.F_z[0].max_abs() == 0.0);
        CHECK(dF.F_zbar[0].max_abs() == 0.0);
    }

    CustomModelSpec spec;
    spec.nonlinearity = "du1*dubar1";
    auto grad_model = custom_model(spec);
    auto phi = band_field(g, 5, 0.5, 6);
    auto dF = evaluate_F_derivatives(grad_model, phi);
    CHECK(rel_err(dF.F_z[0], partial_derivative(phi, 0).conj()) < 1e-12);
    CHECK(rel_err(dF.F_zbar[0], partial_derivative(phi, 0)) < 1e-12);

    auto cubic = builtin_model("toy-cubic", 1);
    auto delta = band_field(g, 5, 1.0, 7);
    auto d = evaluate_F_derivatives(cubic, phi);
    auto ddelta = partial_derivative(delta, 0);
    auto linear = d.F_y * delta + d.F_ybar * delta.conj() + d.F_z[0] * ddelta + d.F_zbar[0] * ddelta.conj();
    double previous = 0.0;
    for (double eps : {1e-3, 5e-4}) {
        auto quotient = (1.0 / eps) * (evaluate_F(cubic, phi + eps * delta) - evaluate_F(cubic, phi));
        double e = rel_err(quotient, linear);
        CHECK(e < 1e-2);
        if (previous > 0.0) CHECK(previous / e == doctest::Approx(2.0).epsilon(0.1));
        previous = e;
    }
}

TEST_CASE("built-in registry") {
    auto quad = builtin_model("toy-quadratic", 1);
    CHECK(quad.metric.interaction_order == 1);
    CHECK(quad.nonlinearity.interaction_order == 2);
    CHECK(quad.interaction() == InteractionClass::quadratic);
    auto free = builtin_model("free", 3);
    CHECK(free.is_free());
    CHECK(free.metric.g0.elliptic());
    auto dbhs = builtin_model("dbhs", 2);
    CHECK(dbhs.form == Form::nondivergence);
    CHECK(bool(dbhs.conjugate_coefficient));
    CHECK(dbhs.interaction() == InteractionClass::cubic);
    auto report = register_model(dbhs);
    CHECK(report.max_derivative_error < 1e-4);
    CHECK(report.metric_scaling == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(builtin_model("smcf", 2).metric.depends_on_gradient);
    CHECK_THROWS_AS(builtin_model("nope", 1), ValidationError);
}

TEST_CASE("custom models are validated") {
    CustomModelSpec spec;
    spec.metric = {{"h", "I*u"}};
    CHECK_THROWS_AS(custom_model(spec), ValidationError);  // not real-valued
    spec.metric = {{"13", "u + ubar"}};
    CHECK_THROWS_AS(custom_model(spec), ValidationError);  // axis out of range
    spec.metric = {{"h", "u*ubar"}};
    CHECK_THROWS_AS(custom_model(spec), ValidationError);  // cubic metric declared quadratic
    spec.interaction = InteractionClass::cubic;
    spec.nonlinearity = "u*ubar*du1";
    CHECK_NOTHROW(custom_model(spec));
    spec.metric = {{"h", "du1 + dubar1"}};
    spec.interaction = InteractionClass::quadratic;
    spec.nonlinearity = "0";
    CHECK_THROWS_AS(custom_model(spec), ValidationError);  // gradient metric in divergence form
    spec.form = Form::nondivergence;
    CHECK(custom_model(spec).metric.depends_on_gradient);
    CHECK_THROWS_AS(parse_form("sideways"), ValidationError);
}
