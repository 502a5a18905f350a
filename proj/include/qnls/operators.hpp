#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "qnls/field.hpp"

namespace qnls {

using Frequency = std::array<double, kMaxDim>;

// Fourier multiplier: symbol(xi) everywhere except xi = 0, where zero_mode_value is used.
struct Multiplier {
    std::function<cplx(const Frequency&)> symbol;
    std::optional<cplx> zero_mode_value;

    // Symbol sampled on the grid in FFT slot order.
    std::vector<cplx> sample(const Grid& grid) const;
    Multiplier then(const Multiplier& other) const;  // product symbol
};

SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m);
// Apply a pre-sampled symbol table (length grid.size()).
SpectralField apply_symbol(const SpectralField& f, const std::vector<cplx>& table);

namespace symbols {
Multiplier identity();
Multiplier partial(int axis);
Multiplier monomial(const MultiIndex& alpha);
Multiplier laplacian();
Multiplier D(double s);
Multiplier J(double s);
Multiplier Dk(int axis, double s);
Multiplier Lambda(int axis, double s, int dim);
Multiplier hilbert(int axis);
}  // namespace symbols

// Derivative orders above this are rejected by multi_derivative.
constexpr int kMaxDerivativeOrder = 24;

SpectralField partial_derivative(const SpectralField& f, int axis);
SpectralField multi_derivative(const SpectralField& f, const MultiIndex& alpha);
SpectralField laplacian(const SpectralField& f);
SpectralField fractional_D(const SpectralField& f, double s);
SpectralField fractional_J(const SpectralField& f, double s);
SpectralField fractional_Dk(const SpectralField& f, int axis, double s);
SpectralField lambda_k(const SpectralField& f, int axis, double s);
SpectralField hilbert_k(const SpectralField& f, int axis);

// Spectrally accurate running integral from the left box edge along axis:
// value at x_j is the integral over [-R, x_j]. The returned vector holds the n
// grid values followed by the right-edge total. Input must be real-valued data
// of a single 1D profile.
std::vector<double> cumulative_integral(const std::vector<double>& profile, double half_width);

}  // namespace qnls

namespace qnls {

// Cached spectrum of one field; cheap repeated derivatives and multipliers.
class Spectrum {
public:
    explicit Spectrum(const SpectralField& f);
    const Grid& grid() const { return grid_; }
    SpectralField derivative(const MultiIndex& alpha) const;
    SpectralField partial(int axis) const;
    SpectralField apply(const Multiplier& m) const;
    SpectralField apply(const std::vector<cplx>& table) const;
    SpectralField field() const;
    const std::vector<cplx>& coefficients() const { return coeffs_; }

private:
    Grid grid_;
    int m_ = 1;
    std::vector<cplx> coeffs_;
};

}  // namespace qnls
