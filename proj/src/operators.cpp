#include "qnls/operators.hpp"

#include <cmath>

#include "qnls/errors.hpp"

namespace qnls {

std::vector<cplx> Multiplier::sample(const Grid& grid) const {
    std::vector<cplx> table(grid.size());
    Frequency xi{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto idx = grid.unravel(i);
        bool zero = true;
        for (int a = 0; a < grid.dim(); ++a) {
            xi[a] = grid.frequencies(a)[idx[a]];
            zero = zero && idx[a] == 0;
        }
        table[i] = (zero && zero_mode_value) ? *zero_mode_value : symbol(xi);
    }
    return table;
}

Multiplier Multiplier::then(const Multiplier& other) const {
    Multiplier out;
    auto a = symbol;
    auto b = other.symbol;
    out.symbol = [a, b](const Frequency& xi) { return a(xi) * b(xi); };
    if (zero_mode_value || other.zero_mode_value) {
        Frequency z{0.0, 0.0, 0.0};
        cplx za = zero_mode_value ? *zero_mode_value : a(z);
        cplx zb = other.zero_mode_value ? *other.zero_mode_value : b(z);
        out.zero_mode_value = za * zb;
    }
    return out;
}

SpectralField apply_symbol(const SpectralField& f, const std::vector<cplx>& table) {
    const Grid& g = f.grid();
    if (table.size() != g.size()) throw ValidationError("symbol table does not match grid");
    auto c = to_spectrum(f);
    for (int k = 0; k < f.components(); ++k)
        for (std::size_t i = 0; i < g.size(); ++i) c[k * g.size() + i] *= table[i];
    SpectralField out = from_spectrum(g, std::move(c), f.components());
    if (!out.all_finite())
        throw NumericalError("multiplier produced non-finite values (singular symbol without zero-mode value?)");
    return out;
}

SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m) {
    return apply_symbol(f, m.sample(f.grid()));
}

namespace symbols {

namespace {
double norm2(const Frequency& xi) { return xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]; }
}  // namespace

Multiplier identity() {
    return {[](const Frequency&) { return cplx(1.0, 0.0); }, std::nullopt};
}

Multiplier partial(int axis) {
    return {[axis](const Frequency& xi) { return cplx(0.0, xi[axis]); }, std::nullopt};
}

Multiplier monomial(const MultiIndex& alpha) {
    return {[alpha](const Frequency& xi) {
                cplx v(1.0, 0.0);
                for (int a = 0; a < alpha.dim; ++a)
                    for (int r = 0; r < alpha[a]; ++r) v *= cplx(0.0, xi[a]);
                return v;
            },
            std::nullopt};
}

Multiplier laplacian() {
    return {[](const Frequency& xi) { return cplx(-norm2(xi), 0.0); }, std::nullopt};
}

Multiplier D(double s) {
    return {[s](const Frequency& xi) { return cplx(std::pow(norm2(xi), 0.5 * s), 0.0); }, cplx(0.0, 0.0)};
}

Multiplier J(double s) {
    return {[s](const Frequency& xi) { return cplx(std::pow(1.0 + norm2(xi), 0.5 * s), 0.0); }, std::nullopt};
}

// Singular at xi_k = 0 for s < 0 along the whole hyperplane, not only the origin;
// those slots are set to 0 like the zero mode.
Multiplier Dk(int axis, double s) {
    return {[axis, s](const Frequency& xi) {
                double a = std::abs(xi[axis]);
                return a == 0.0 ? cplx(0.0, 0.0) : cplx(std::pow(a, s), 0.0);
            },
            cplx(0.0, 0.0)};
}

Multiplier Lambda(int axis, double s, int dim) {
    return {[axis, s, dim](const Frequency& xi) {
                double q = 1.0;
                for (int a = 0; a < dim; ++a)
                    if (a != axis) q += xi[a] * xi[a];
                return cplx(std::pow(q, 0.5 * s), 0.0);
            },
            std::nullopt};
}

Multiplier hilbert(int axis) {
    return {[axis](const Frequency& xi) {
                double v = xi[axis];
                double sgn = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
                return cplx(0.0, -sgn);
            },
            cplx(0.0, 0.0)};
}

}  // namespace symbols

SpectralField partial_derivative(const SpectralField& f, int axis) {
    return apply_multiplier(f, symbols::partial(axis));
}

SpectralField multi_derivative(const SpectralField& f, const MultiIndex& alpha) {
    if (alpha.total() == 0) return f;
    if (alpha.total() > kMaxDerivativeOrder)
        throw ValidationError("multi-index order " + std::to_string(alpha.total()) + " exceeds the cap");
    double log_peak = 0.0;
    for (int a = 0; a < f.grid().dim(); ++a) log_peak += alpha[a] * std::log10(f.grid().nyquist(a));
    if (log_peak > 250.0) throw NumericalError("derivative symbol magnitude overflows for this resolution");
    return apply_multiplier(f, symbols::monomial(alpha));
}

SpectralField laplacian(const SpectralField& f) { return apply_multiplier(f, symbols::laplacian()); }
SpectralField fractional_D(const SpectralField& f, double s) { return apply_multiplier(f, symbols::D(s)); }
SpectralField fractional_J(const SpectralField& f, double s) { return apply_multiplier(f, symbols::J(s)); }
SpectralField fractional_Dk(const SpectralField& f, int axis, double s) {
    return apply_multiplier(f, symbols::Dk(axis, s));
}
SpectralField lambda_k(const SpectralField& f, int axis, double s) {
    return apply_multiplier(f, symbols::Lambda(axis, s, f.grid().dim()));
}
SpectralField hilbert_k(const SpectralField& f, int axis) { return apply_multiplier(f, symbols::hilbert(axis)); }

std::vector<double> cumulative_integral(const std::vector<double>& profile, double half_width) {
    const int n = static_cast<int>(profile.size());
    Grid line(1, n, half_width);
    std::vector<cplx> c(profile.begin(), profile.end());
    forward_transform(line, c.data());
    const double mean = c[0].real();
    cplx at_left(0.0, 0.0);
    for (int j = 1; j < n; ++j) {
        if (2 * j == n) {
            c[j] = 0.0;
            continue;
        }
        c[j] /= cplx(0.0, line.frequencies(0)[j]);
        at_left += c[j];
    }
    c[0] = 0.0;
    inverse_transform(line, c.data());
    std::vector<double> out(n + 1);
    for (int j = 0; j < n; ++j) out[j] = mean * (line.coordinates(0)[j] + half_width) + (c[j] - at_left).real();
    out[n] = mean * 2.0 * half_width;
    return out;
}

}  // namespace qnls

namespace qnls {

Spectrum::Spectrum(const SpectralField& f) : grid_(f.grid()), m_(f.components()), coeffs_(to_spectrum(f)) {}

SpectralField Spectrum::apply(const std::vector<cplx>& table) const {
    std::vector<cplx> c = coeffs_;
    for (int k = 0; k < m_; ++k)
        for (std::size_t i = 0; i < grid_.size(); ++i) c[k * grid_.size() + i] *= table[i];
    return from_spectrum(grid_, std::move(c), m_);
}

SpectralField Spectrum::apply(const Multiplier& m) const { return apply(m.sample(grid_)); }

SpectralField Spectrum::field() const { return from_spectrum(grid_, coeffs_, m_); }

SpectralField Spectrum::derivative(const MultiIndex& alpha) const {
    if (alpha.total() == 0) return field();
    if (alpha.total() > kMaxDerivativeOrder)
        throw ValidationError("multi-index order " + std::to_string(alpha.total()) + " exceeds the cap");
    std::vector<cplx> c = coeffs_;
    std::array<std::vector<cplx>, kMaxDim> factor;
    for (int a = 0; a < grid_.dim(); ++a) {
        factor[a].resize(grid_.points(a));
        for (int j = 0; j < grid_.points(a); ++j) {
            cplx w(1.0, 0.0);
            for (int r = 0; r < alpha[a]; ++r) w *= cplx(0.0, grid_.frequencies(a)[j]);
            factor[a][j] = w;
        }
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        auto idx = grid_.unravel(i);
        cplx w(1.0, 0.0);
        for (int a = 0; a < grid_.dim(); ++a) w *= factor[a][idx[a]];
        for (int k = 0; k < m_; ++k) c[k * grid_.size() + i] *= w;
    }
    return from_spectrum(grid_, std::move(c), m_);
}

SpectralField Spectrum::partial(int axis) const { return derivative(MultiIndex::unit(grid_.dim(), axis)); }

}  // namespace qnls
