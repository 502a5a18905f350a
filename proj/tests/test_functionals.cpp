#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "qnls/errors.hpp"
#include "qnls/functionals.hpp"
#include "qnls/norms.hpp"
#include "qnls/operators.hpp"
#include "qnls/scenario.hpp"
#include "qnls/solver.hpp"

using namespace qnls;

namespace {

// Probabilists' Hermite polynomial: d^m/dx^m e^{-x^2/2} = (-1)^m He_m(x) e^{-x^2/2}.
double hermite(int m, double x) {
    double a = 1.0, b = x;
    if (m == 0) return a;
    for (int k = 1; k < m; ++k) {
        double c = x * b - k * a;
        a = b;
        b = c;
    }
    return b;
}

// Composite Simpson on [-L, L].
double simpson(const std::function<double(double)>& f, double L = 12.0, int n = 24000) {
    const double h = 2.0 * L / n;
    double s = f(-L) + f(L);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-L + i * h);
    return s * h / 3.0;
}

SpectralField unit_gaussian(const Grid& g) {
    return SpectralField::from_function(g, [&](const double* x) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += x[a] * x[a];
        return cplx(std::exp(-0.5 * r2));
    });
}

Trajectory stationary(const SpectralField& f, int count, double dt) {
    Trajectory t;
    for (int i = 0; i < count; ++i) t.checkpoints.push_back({i * dt, f});
    t.model = std::make_shared<ModelProblem>(builtin_model("free", f.grid().dim()));
    return t;
}

SolverParams params(double dt, double T, int stride, double eps = 0.0) {
    SolverParams p;
    p.dt = dt;
    p.T = T;
    p.checkpoint_stride = stride;
    p.epsilon = eps;
    return p;
}

SpectralField gaussian(const Grid& g, double amplitude, double width, double k0 = 0.0) {
    InitialData d;
    d.amplitude = amplitude;
    d.width = width;
    d.center.assign(g.dim(), 0.0);
    d.wavevector.assign(g.dim(), 0.0);
    d.wavevector[0] = k0;
    return make_initial_data(g, d);
}

}  // namespace

TEST_CASE("default indices satisfy the class constraints") {
    for (int d = 1; d <= 3; ++d) {
        CHECK(default_s1(d) > d / 2.0 + 2.5);
        CHECK(default_s2(d) > d / 2.0 + 1.0);
        CHECK(default_s2(d) + 2 <= default_s1(d) + 0.5);
        CHECK(default_s3(d) + 0.5 > (d + 3) / 2.0);
    }
    CHECK(default_s1(1) == 4);
    CHECK(default_s2(1) == 2);
}

TEST_CASE("momentum density: real fields, plane waves, quadrature") {
    Grid g(2, 16, M_PI);
    // Resolved, so the Nyquist coefficient (which odd derivatives turn imaginary) is negligible.
    auto real = unit_gaussian(Grid(2, 64, 8.0));
    CHECK(momentum_density(real, MultiIndex::zero(2), 0).max_abs() < 1e-14);

    const double x1 = 2.0, x2 = -3.0;
    auto wave = SpectralField::from_function(g, [&](const double* x) { return std::exp(cplx(0.0, x1 * x[0] + x2 * x[1])); });
    MultiIndex alpha(2, {1, 2, 0});
    auto rho = momentum_density(wave, alpha, 1);
    const double expected = -x2 * x1 * x1 * std::pow(x2, 4);
    for (auto v : rho.component(0)) CHECK(v.real() == doctest::Approx(expected).epsilon(1e-10));

    // Random trigonometric polynomial, derivatives summed mode by mode.
    Grid line(1, 64, 3.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    std::vector<std::pair<double, cplx>> modes;
    for (int m = -8; m <= 8; ++m) modes.push_back({M_PI * m / 3.0, cplx(n01(rng), n01(rng))});
    auto eval = [&](double x, int order) {
        cplx s(0.0, 0.0);
        for (auto [xi, c] : modes) s += std::pow(cplx(0.0, xi), order) * c * std::exp(cplx(0.0, xi * x));
        return s;
    };
    double brute = 0.0;
    for (int j = 0; j < 64; ++j) {
        double x = line.coordinate(0, j);
        brute += std::imag(eval(x, 1) * std::conj(eval(x, 2))) * line.spacing(0);
    }
    auto f = SpectralField::from_function(line, [&](const double* x) { return eval(x[0], 0); });
    double integral = 0.0;
    auto density = momentum_density(f, MultiIndex(1, {1, 0, 0}), 0);
    for (auto v : density.component(0)) integral += v.real();
    integral *= line.spacing(0);
    CHECK(integral == doctest::Approx(brute).epsilon(1e-10));
}

TEST_CASE("Y: zero trajectory, stationary closed form, sandwich") {
    Grid g(1, 128, 12.0);
    auto zero = good_term_Y(stationary(SpectralField(g), 3, 0.5), 2);
    for (double v : zero.at("Y").values) CHECK(v == 0.0);

    const int s1 = 2;
    double slope = 0.0;
    for (int j = 0; j < g.points(0); ++j) {
        double x = g.coordinate(0, j), w = 1.0 / std::pow(1.0 + std::abs(x), 2), e = std::exp(-x * x);
        double q = e;
        for (int a = 0; a <= s1; ++a) q += std::pow(hermite(a + 1, x), 2) * e;
        slope += q * w * g.spacing(0);
    }
    auto Y = good_term_Y(stationary(unit_gaussian(g), 5, 0.25), s1);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(Y.at("Y").values[i] == doctest::Approx(Y.at("Y").times[i] * slope).epsilon(1e-10));

    auto traj = run(builtin_model("toy-quadratic", 1), gaussian(Grid(1, 256, 20.0), 1e-2, 1.0, 1.0),
                    params(1e-3, 1.0, 100));
    auto Yq = good_term_Y(traj, default_s1(1));
    for (std::size_t i = 0; i < Yq.at("Y").values.size(); ++i) {
        CHECK(Yq.at("Y_top").values[i] <= Yq.at("Y").values[i] + 1e-15);
        CHECK(Yq.at("Y").values[i] <= Yq.at("Y_bound").values[i] + 1e-15);
        if (i > 0) CHECK(Yq.at("Y").values[i] >= Yq.at("Y").values[i - 1]);
    }
}

TEST_CASE("W: needs d >= 2, zero trajectory, separable closed form") {
    CHECK_THROWS_AS(good_term_W(stationary(SpectralField(Grid(1, 16, 1.0)), 2, 1.0), 2), ValidationError);
    Grid g(2, 64, 8.0);
    auto zero = good_term_W(stationary(SpectralField(g), 3, 0.5), 2);
    for (double v : zero.at("W").values) CHECK(v == 0.0);

    // f = a(x) a(y) with a = e^{-x^2/2}; every slice quantity factorizes.
    const int s3 = 2;
    auto moment = [](int m) { return std::tgamma(m + 0.5); };  // int xi^{2m} e^{-xi^2}
    auto lam_moment = [](int m) {
        return simpson([m](double xi) { return std::sqrt(1.0 + xi * xi) * std::pow(xi, 2 * m) * std::exp(-xi * xi); });
    };
    double full = 0.0, top = 0.0;
    for (int j = 0; j < g.points(0); ++j) {
        double x = g.coordinate(0, j), e = std::exp(-x * x);
        auto sq = [&](int m) { return std::pow(hermite(m, x), 2) * e; };
        double A = 0.0, B = 0.0, Btop = 0.0;
        for (const auto& beta : multi_indices(2, 0, s3 - 1)) A += sq(beta[0]) * lam_moment(beta[1]);
        for (const auto& alpha : multi_indices(2, 0, s3)) {
            double v = sq(alpha[0] + 1) * moment(alpha[1]);
            B += v;
            if (alpha.total() == s3) Btop += v;
        }
        double C = sq(0) * moment(0);
        full += g.spacing(0) * A * (B + C);
        top += g.spacing(0) * A * Btop;
    }
    full *= 2.0;  // the two axes contribute equally
    top *= 2.0;
    auto W = good_term_W(stationary(unit_gaussian(g), 3, 0.5), s3);
    CHECK(W.at("W").values[2] == doctest::Approx(1.0 * full).epsilon(1e-8));
    CHECK(W.at("W_top").values[2] == doctest::Approx(1.0 * top).epsilon(1e-8));
}

TEST_CASE("X: zero field, free-flow Sobolev part, Gaussian closed form") {
    Grid g(1, 256, 16.0);
    auto zero = master_X(stationary(SpectralField(g), 2, 1.0), 4, 2);
    for (double v : zero.at("X").values) CHECK(v == 0.0);

    auto traj = run(builtin_model("free", 1), unit_gaussian(g), params(1e-2, 1.0, 20));
    auto X = master_X(traj, 4, 2);
    const auto& hs = X.at("X_sobolev").values;
    for (double v : hs) CHECK(v == doctest::Approx(hs.front()).epsilon(1e-10));

    // |F a|^2 = 2 pi e^{-xi^2}.
    double sob = simpson([](double xi) { return std::pow(1.0 + xi * xi, 4.5) * std::exp(-xi * xi); });
    double weighted = 0.0;
    for (int j = 0; j < g.points(0); ++j) {
        double x = g.coordinate(0, j);
        for (int b = 0; b <= 2; ++b)
            weighted += std::pow(1.0 + std::abs(x), 4) * std::pow(hermite(b, x), 2) * std::exp(-x * x) * g.spacing(0);
    }
    CHECK(X.at("X_sobolev").values[0] == doctest::Approx(sob).epsilon(1e-8));
    CHECK(X.at("X_weighted").values[0] == doctest::Approx(weighted).epsilon(1e-8));
    CHECK_THROWS_AS(master_X(traj, 4, 3), ValidationError);
}

TEST_CASE("momentum residual: free plane wave and time convergence") {
    Grid g(1, 64, M_PI);
    auto wave = SpectralField::from_function(g, [](const double* x) { return std::exp(cplx(0.0, 3.0 * x[0])); });
    auto free = run(builtin_model("free", 1), wave, params(1e-2, 0.1, 1));
    auto r = momentum_identity_residual(free, MultiIndex(1, {1, 0, 0}), 0);
    // Exact in time; what is left is roundoff lifted by four derivatives near the padded Nyquist band.
    for (double v : r.at("residual_L2").values) CHECK(v < 1e-7);

    Grid line(1, 128, 8.0 * M_PI);
    auto quad = builtin_model("toy-quadratic", 1);
    auto phi0 = gaussian(line, 1e-3, 1.0, 1.0);
    auto size = [&](double dt) {
        auto traj = run(quad, phi0, params(dt, 0.1, 10));
        auto series = momentum_identity_residual(traj, MultiIndex::zero(1), 0);
        const auto& v = series.at("residual_L2").values;
        return *std::max_element(v.begin(), v.end());
    };
    CHECK(size(1e-3) / size(5e-4) >= 1.8);

    auto dbhs = run(builtin_model("dbhs", 1), gaussian(line, 1e-2, 1.0), params(1e-3, 0.01, 5));
    CHECK_THROWS_AS(momentum_identity_residual(dbhs, MultiIndex::zero(1), 0), ValidationError);
}

TEST_CASE("weighted momentum ledger: zero data, free identity, stable constant") {
    Grid g(1, 128, 20.0);
    auto free = builtin_model("free", 1);
    auto zero = run(free, SpectralField(g), params(1e-2, 0.5, 10));
    auto Z = weighted_momentum_ledger(zero, MultiIndex::zero(1), 0, 4, 2);
    for (const auto& t : Z.terms) CHECK(t.value == 0.0);

    auto free_ledger = [&](int n) {
        auto traj = run(free, gaussian(Grid(1, n, 20.0), 1.0, 1.0, 1.0), params(1e-3, 0.5, 10));
        return weighted_momentum_ledger(traj, MultiIndex::zero(1), 0, 4, 2);
    };
    auto L = free_ledger(128);
    CHECK(L.value("h_contamination") == 0.0);
    CHECK(L.value("h_derivative") == 0.0);
    CHECK(L.value("nonlinear_divergence") == 0.0);
    CHECK(L.value("nonlinear_source") == 0.0);
    CHECK(L.value("good_term") > 0.0);
    // The weights have a kink at the origin, so grid quadrature closes the identity only to O(h^2).
    auto fine = free_ledger(256);
    CHECK(std::abs(fine.identity_residual) < 2e-3 * fine.value("good_term"));
    CHECK(L.identity_residual / fine.identity_residual == doctest::Approx(4.0).epsilon(0.2));

    auto quad = builtin_model("toy-quadratic", 1);
    auto constant = [&](int n) {
        auto t = run(quad, gaussian(Grid(1, n, 20.0), 1e-2, 1.0, 1.0), params(1e-3, 0.5, 10));
        return weighted_momentum_ledger(t, MultiIndex::zero(1), 0, 4, 2).measured_constant;
    };
    double c1 = constant(128), c2 = constant(256);
    CHECK(std::isfinite(c1));
    CHECK(c2 == doctest::Approx(c1).epsilon(0.25));
}

TEST_CASE("cubic weight integral: zero, telescoping, separable closed form") {
    CHECK_THROWS_AS(cubic_weight_integral(SpectralField(Grid(1, 16, 1.0)), MultiIndex::zero(1), 0), ValidationError);
    Grid g(2, 64, 8.0);
    for (double v : cubic_weight_integral(SpectralField(g), MultiIndex::zero(2), 0)) CHECK(v == 0.0);

    auto f = unit_gaussian(g);
    auto cum = cubic_weight_integral(f, MultiIndex::zero(2), 0);
    double global = l2_norm(lambda_k(f, 0, 0.5));
    CHECK(cum.back() == doctest::Approx(global * global).epsilon(1e-12));

    // int_{-inf}^x e^{-y^2} dy times ||Lambda^{1/2} a||^2 in the transverse variable.
    double transverse = simpson([](double xi) { return std::sqrt(1.0 + xi * xi) * std::exp(-xi * xi); });
    for (int j = 0; j < g.points(0); j += 7) {
        double x = g.coordinate(0, j);
        double oracle = 0.5 * std::sqrt(M_PI) * (1.0 + std::erf(x)) * transverse;
        // The Lambda^{1/2} kernel decays like e^{-|x|}; its periodization costs about e^{-2R}.
        CHECK(std::abs(cum[j] - oracle) < 1e-7 * transverse);
    }
}

TEST_CASE("weighted norm evolution follows the free Gaussian moments") {
    Grid g(1, 512, 40.0);
    auto traj = run(builtin_model("free", 1), unit_gaussian(g), params(1e-3, 1.0, 100));
    auto ev = weighted_norm_evolution(traj, MultiIndex::zero(1), 0);
    // |phi(t)|^2 is a Gaussian of variance sigma^2 = |s|^2 / 2 with s = 1 + 2it and mass sqrt(pi).
    const auto& v = ev.series.at("x2_norm_sq");
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        double t = v.times[i], abs_s2 = 1.0 + 4.0 * t * t, sigma2 = abs_s2 / 2.0;
        double oracle = std::sqrt(M_PI) * 3.0 * sigma2 * sigma2;
        CHECK(v.values[i] == doctest::Approx(oracle).epsilon(1e-4));
    }
    auto zero = run(builtin_model("free", 1), SpectralField(g), params(1e-2, 0.1, 5));
    auto flat = weighted_norm_evolution(zero, MultiIndex::zero(1), 0);
    for (double x : flat.series.at("x2_norm").values) CHECK(x == 0.0);
}

TEST_CASE("bootstrap monitor: zero data, small quadratic data") {
    Grid g(1, 256, 40.0);
    auto quad = builtin_model("toy-quadratic", 1);
    BootstrapOptions o;
    o.s1 = 5;
    auto zero = bootstrap_monitor(run(quad, SpectralField(g), params(1e-2, 1.0, 10)), InteractionClass::quadratic, o);
    CHECK(zero.zero_data);
    CHECK(zero.sup_ratio == 1.0);
    CHECK_FALSE(zero.exceeded);

    auto traj = run(quad, gaussian(g, 1e-3, 3.0), params(1e-3, 1.0, 50));
    auto b = bootstrap_monitor(traj, InteractionClass::quadratic, o);
    CHECK(b.sup_ratio >= 1.0);
    CHECK(b.sup_ratio <= 2.0);
    CHECK_FALSE(b.exceeded);
    CHECK_THROWS_AS(bootstrap_monitor(traj, InteractionClass::cubic, o), ValidationError);
}

TEST_CASE("cumulative trapezoid") {
    auto c = cumulative_trapezoid({0.0, 1.0, 3.0}, {1.0, 3.0, 5.0});
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 2.0);
    CHECK(c[2] == 10.0);
}
