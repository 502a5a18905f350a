#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "qnls/checkpoint.hpp"
#include "qnls/errors.hpp"
#include "qnls/field.hpp"
#include "qnls/hashing.hpp"
#include "qnls/norms.hpp"
#include "qnls/operators.hpp"

using namespace qnls;

namespace {

double rel_err(const SpectralField& a, const SpectralField& b) {
    double s = l2_norm(b);
    return l2_norm(a - b) / (s > 0.0 ? s : 1.0);
}

// Trigonometric polynomial with random coefficients on modes 1 <= |m| <= top (mean zero).
struct ModeSum {
    std::vector<int> modes;
    std::vector<cplx> coeffs;
    double R;

    ModeSum(double half_width, int top, unsigned seed) : R(half_width) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01;
        for (int m = -top; m <= top; ++m) {
            if (m == 0) continue;
            modes.push_back(m);
            coeffs.emplace_back(n01(rng), n01(rng));
        }
    }
    // Applies a symbol by direct summation at x.
    cplx eval(double x, const std::function<cplx(double)>& symbol) const {
        cplx s(0.0, 0.0);
        for (std::size_t i = 0; i < modes.size(); ++i) {
            double xi = M_PI * modes[i] / R;
            s += symbol(xi) * coeffs[i] * std::exp(cplx(0.0, xi * x));
        }
        return s;
    }
    SpectralField field(const Grid& g, const std::function<cplx(double)>& symbol) const {
        return SpectralField::from_function(g, [&](const double* x) { return eval(x[0], symbol); });
    }
};

cplx one(double) { return cplx(1.0, 0.0); }

}  // namespace

TEST_CASE("grid frequencies follow xi = pi k / R") {
    Grid g(1, 16, 4.0);
    CHECK(g.frequency(0, 1) == doctest::Approx(M_PI / 4.0));
    CHECK(g.frequency(0, 15) == doctest::Approx(-M_PI / 4.0));
    CHECK(g.coordinate(0, 0) == doctest::Approx(-4.0));
    CHECK(g.spacing(0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(Grid(1, 7, 1.0), ValidationError);
    CHECK_THROWS_AS(Grid(1, 8, -1.0), ValidationError);
}

TEST_CASE("transform round trip and upsampling preserve band-limited fields") {
    Grid g(2, {16, 32, 1}, {3.0, 5.0, 1.0});
    auto f = SpectralField::from_function(g, [](const double* x) {
        return std::exp(cplx(0.0, M_PI * x[0] / 3.0)) * std::cos(2.0 * M_PI * x[1] / 5.0);
    });
    auto back = from_spectrum(g, to_spectrum(f));
    CHECK(rel_err(back, f) < 1e-14);
    auto fine = upsample(f, 2);
    CHECK(l2_norm(fine) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
    CHECK(rel_err(restrict_to(fine, g), f) < 1e-14);
}

TEST_CASE("multipliers: identity, derivative eigenfunction, |xi|^1/2 against direct summation") {
    const double R = 3.0;
    Grid g(1, 64, R);
    ModeSum m(R, 10, 7);
    auto f = m.field(g, one);
    CHECK(rel_err(apply_multiplier(f, symbols::identity()), f) < 1e-14);

    auto s = SpectralField::from_function(g, [&](const double* x) { return cplx(std::sin(M_PI * x[0] / R)); });
    auto c = SpectralField::from_function(
        g, [&](const double* x) { return cplx(M_PI / R * std::cos(M_PI * x[0] / R)); });
    CHECK(rel_err(apply_multiplier(s, symbols::partial(0)), c) < 1e-13);

    auto expected = m.field(g, [](double xi) { return cplx(std::sqrt(std::abs(xi)), 0.0); });
    CHECK(rel_err(apply_multiplier(f, symbols::D(0.5)), expected) < 1e-10);
}

TEST_CASE("partial derivative: constants, sines, centred differences") {
    const double R = 10.0;
    Grid g(1, 256, R);
    auto constant = SpectralField::from_function(g, [](const double*) { return cplx(2.5); });
    CHECK(l2_norm(partial_derivative(constant, 0)) < 1e-13);

    auto gauss = SpectralField::from_function(g, [](const double* x) { return cplx(std::exp(-x[0] * x[0])); });
    auto dg = partial_derivative(gauss, 0);
    const double h = g.spacing(0);
    auto v = gauss.component(0);
    auto dv = dg.component(0);
    double worst = 0.0;
    for (int j = 1; j + 1 < g.points(0); ++j)
        worst = std::max(worst, std::abs((v[j + 1] - v[j - 1]) / (2.0 * h) - dv[j]));
    // |f'''| <= 7 for e^{-x^2}; the centred difference error is h^2 |f'''| / 6.
    CHECK(worst < 7.0 * h * h / 6.0);
    CHECK(worst > 0.0);
}

TEST_CASE("multi-derivative: zero order, mixed sines, composition") {
    const double R = 2.0;
    Grid g(2, 32, R);
    auto f = SpectralField::from_function(
        g, [&](const double* x) { return cplx(std::sin(M_PI * x[0] / R) * std::sin(M_PI * x[1] / R)); });
    CHECK(rel_err(multi_derivative(f, MultiIndex::zero(2)), f) < 1e-15);
    auto expected = SpectralField::from_function(g, [&](const double* x) {
        return cplx((M_PI / R) * (M_PI / R) * std::cos(M_PI * x[0] / R) * std::cos(M_PI * x[1] / R));
    });
    CHECK(rel_err(multi_derivative(f, MultiIndex(2, {1, 1, 0})), expected) < 1e-13);

    Grid g1(1, 64, 3.0);
    auto h = ModeSum(3.0, 12, 3).field(g1, one);
    CHECK(rel_err(multi_derivative(h, MultiIndex(1, {2, 0, 0})),
                  partial_derivative(partial_derivative(h, 0), 0)) < 1e-14);
}

TEST_CASE("fractional D: zero order, composition, unit frequency") {
    Grid g(1, 64, M_PI);
    auto f = ModeSum(M_PI, 10, 11).field(g, one);
    CHECK(rel_err(fractional_D(f, 0.0), f) < 1e-14);
    auto constant = SpectralField::from_function(g, [](const double*) { return cplx(1.0); });
    CHECK(l2_norm(fractional_D(constant, 0.5)) < 1e-14);
    CHECK(rel_err(fractional_D(fractional_D(f, 0.5), 0.5), fractional_D(f, 1.0)) < 1e-12);
    auto sine = SpectralField::from_function(g, [](const double* x) { return cplx(std::sin(x[0])); });
    CHECK(rel_err(fractional_D(sine, 0.5), sine) < 1e-13);
}

TEST_CASE("Bessel potentials, anisotropic weights, directional D") {
    Grid g(1, 64, 4.0);
    auto f = ModeSum(4.0, 10, 5).field(g, one);
    CHECK(rel_err(fractional_J(fractional_J(f, 1.5), -1.5), f) < 1e-10);
    CHECK(rel_err(lambda_k(f, 0, 0.5), f) < 1e-14);
    CHECK(rel_err(fractional_Dk(f, 0, 1.0), hilbert_k(partial_derivative(f, 0), 0)) < 1e-10);
}

TEST_CASE("Hilbert transform: square is -I, cosine to sine, isometry") {
    Grid g(1, 64, M_PI);
    auto f = ModeSum(M_PI, 12, 9).field(g, one);
    CHECK(rel_err(hilbert_k(hilbert_k(f, 0), 0), -f) < 1e-12);
    CHECK(std::abs(l2_norm(hilbert_k(f, 0)) - l2_norm(f)) < 1e-12 * l2_norm(f));
    auto c = SpectralField::from_function(g, [](const double* x) { return cplx(std::cos(x[0])); });
    auto s = SpectralField::from_function(g, [](const double* x) { return cplx(std::sin(x[0])); });
    CHECK(rel_err(hilbert_k(c, 0), s) < 1e-13);
}

TEST_CASE("Sobolev norm: zero, L2 quadrature, Gaussian H^2 closed form") {
    Grid g(1, 512, 20.0 * M_PI);
    CHECK(sobolev_norm(SpectralField(g), 2.0) == 0.0);
    auto f = SpectralField::from_function(g, [](const double* x) { return cplx(std::exp(-x[0] * x[0])); });
    double direct = 0.0;
    for (auto v : f.component(0)) direct += std::norm(v);
    CHECK(sobolev_norm(f, 0.0) == doctest::Approx(std::sqrt(direct * g.spacing(0))).epsilon(1e-12));
    // |f^|^2 = pi e^{-xi^2/2}: (1/2pi) int (1+xi^2)^2 |f^|^2 = 3 sqrt(2 pi).
    const double oracle = std::sqrt(3.0 * std::sqrt(2.0 * M_PI));
    CHECK(std::abs(sobolev_norm(f, 2.0) / oracle - 1.0) < 1e-6);
    // Homogeneous: (1/2pi) int xi^2 |f^|^2 = sqrt(2 pi)/2.
    CHECK(std::abs(sobolev_norm(f, 1.0, true) / std::sqrt(std::sqrt(2.0 * M_PI) / 2.0) - 1.0) < 1e-6);
}

TEST_CASE("BMO: constants vanish, mean shifts are invisible, bounded by twice the sup") {
    Grid g(1, 128, 8.0);
    auto constant = SpectralField::from_function(g, [](const double*) { return cplx(3.0); });
    CHECK(bmo_norm(constant) < 1e-14);
    for (unsigned seed = 1; seed <= 20; ++seed) {
        auto f = ModeSum(8.0, 6, seed).field(g, one).real_part();
        auto shifted = f.map([](cplx z) { return z + 4.0; });
        CHECK(bmo_norm(shifted) == doctest::Approx(bmo_norm(f)).epsilon(1e-12));
        CHECK(bmo_norm(f) <= 2.0 * f.max_abs());
    }
}

TEST_CASE("weighted L2: no weight, compact support, Gaussian moments") {
    Grid g(1, 512, 10.0);
    auto f = SpectralField::from_function(g, [](const double* x) { return cplx(std::exp(-x[0] * x[0])); });
    CHECK(weighted_L2_norm(f, 0, 0.0) == doctest::Approx(l2_norm(f)).epsilon(1e-14));

    auto bump = SpectralField::from_function(
        g, [](const double* x) { return cplx(std::abs(x[0]) <= 1.0 ? 1.0 - x[0] * x[0] : 0.0); });
    double w1 = weighted_L2_norm(bump, 0, 1.0);
    CHECK(w1 >= l2_norm(bump));
    CHECK(w1 <= 2.0 * l2_norm(bump));

    // Same rule on analytic values: the norm is the grid quadrature of <x>^4 |f|^2.
    double rule = 0.0;
    for (int j = 0; j < g.points(0); ++j) {
        double x = g.coordinate(0, j);
        rule += std::pow(1.0 + std::abs(x), 4) * std::exp(-2.0 * x * x);
    }
    CHECK(std::abs(weighted_L2_norm(f, 0, 2.0) / std::sqrt(rule * g.spacing(0)) - 1.0) < 1e-12);

    // Continuum value sum_m C(4,m) Gamma((m+1)/2) / 2^{(m+1)/2}; the kink of <x> at 0
    // limits the rule to second order, so the error drops fourfold per doubling.
    const double binom[5] = {1, 4, 6, 4, 1};
    double exact = 0.0;
    for (int m = 0; m <= 4; ++m) exact += binom[m] * std::tgamma((m + 1) / 2.0) / std::pow(2.0, (m + 1) / 2.0);
    auto err = [&](int n) {
        Grid gn(1, n, 10.0);
        auto fn = SpectralField::from_function(gn, [](const double* x) { return cplx(std::exp(-x[0] * x[0])); });
        double w = weighted_L2_norm(fn, 0, 2.0);
        return std::abs(w * w - exact);
    };
    CHECK(err(512) < 2e-3);
    CHECK(err(256) / err(512) == doctest::Approx(4.0).epsilon(0.05));
    CHECK_THROWS_AS(weighted_L2_norm(f, 0, -1.0), ValidationError);
}

TEST_CASE("slice norms: zero, separable factorization, Fubini") {
    Grid g(2, {32, 16, 1}, {2.0, 3.0, 1.0});
    SpectralField zero(g);
    for (int j = 0; j < 32; ++j) CHECK(slice_L2_norm(zero, 0, j) == 0.0);
    auto a = [](double x) { return std::exp(-x * x); };
    auto b = [](double y) { return 1.0 + 0.5 * std::cos(M_PI * y / 3.0); };
    auto f = SpectralField::from_function(g, [&](const double* x) { return cplx(a(x[0]) * b(x[1])); });
    double b2 = 0.0;
    for (int j = 0; j < 16; ++j) b2 += b(g.coordinate(1, j)) * b(g.coordinate(1, j));
    const double b_norm = std::sqrt(b2 * g.spacing(1));
    double fubini = 0.0;
    for (int j = 0; j < 32; ++j) {
        double s = slice_L2_norm(f, 0, j);
        CHECK(s == doctest::Approx(a(g.coordinate(0, j)) * b_norm).epsilon(1e-12));
        fubini += s * s * g.spacing(0);
    }
    CHECK(fubini == doctest::Approx(l2_norm(f) * l2_norm(f)).epsilon(1e-12));
    CHECK_THROWS_AS(slice_L2_norm(f, 0, 32), ValidationError);
}

TEST_CASE("dealiasing keeps the lower two thirds") {
    Grid g(1, 30, 1.0);
    auto f = SpectralField::from_function(g, [](const double* x) {
        return std::exp(cplx(0.0, M_PI * 3 * x[0])) + std::exp(cplx(0.0, M_PI * 12 * x[0]));
    });
    auto kept = dealias(f);
    auto low = SpectralField::from_function(g, [](const double* x) { return std::exp(cplx(0.0, M_PI * 3 * x[0])); });
    CHECK(rel_err(kept, low) < 1e-14);
}

TEST_CASE("checkpoints store complex64 values and re-encode identically") {
    Grid g(2, {8, 12, 1}, {1.0, 2.0, 1.0});
    auto f2 = SpectralField::from_function(g, [](const double* x) { return cplx(x[0], x[1] * x[1]); });
    std::string bytes = encode_checkpoint(f2, 0.25);
    std::istringstream in(bytes);
    Checkpoint c = read_checkpoint(in);
    CHECK(c.time == 0.25);
    CHECK(c.field.grid().points(1) == 12);
    std::vector<float> expected;
    for (auto z : f2.values()) {
        expected.push_back(static_cast<float>(z.real()));
        expected.push_back(static_cast<float>(z.imag()));
    }
    bool same = true;
    for (std::size_t i = 0; i < f2.size(); ++i)
        same = same && c.field.values()[i] == cplx(expected[2 * i], expected[2 * i + 1]);
    CHECK(same);
    CHECK(encode_checkpoint(c.field, c.time) == bytes);
    CHECK(encode_checkpoint(f2, 0.25) == bytes);
    std::string corrupt = bytes;
    corrupt[0] ^= 0x5a;
    std::istringstream bad(corrupt);
    CHECK_THROWS_AS(read_checkpoint(bad), ValidationError);
}

TEST_CASE("git-style content hashes") {
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
}
