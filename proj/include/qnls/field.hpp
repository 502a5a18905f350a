#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "qnls/grid.hpp"

namespace qnls {

using cplx = std::complex<double>;

// Complex field with m components on a periodic grid, physical-space samples.
// Value type: copies are independent, operations return new fields.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const Grid& grid, int components = 1);
    SpectralField(const Grid& grid, std::vector<cplx> values, int components = 1);

    static SpectralField from_function(const Grid& grid, const std::function<cplx(const double*)>& f);

    const Grid& grid() const { return grid_; }
    int components() const { return m_; }
    std::size_t size() const { return values_.size(); }
    std::size_t component_size() const { return grid_.size(); }

    const std::vector<cplx>& values() const { return values_; }
    std::vector<cplx>& values() { return values_; }
    std::span<const cplx> component(int c) const;
    std::span<cplx> component(int c);
    cplx operator[](std::size_t i) const { return values_[i]; }
    cplx& operator[](std::size_t i) { return values_[i]; }

    bool all_finite() const;
    bool is_zero() const;
    double max_abs() const;

    SpectralField conj() const;
    SpectralField real_part() const;
    SpectralField imag_part() const;
    SpectralField abs2() const;
    SpectralField map(const std::function<cplx(cplx)>& f) const;

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(const SpectralField& o);
    SpectralField& operator*=(cplx a);

private:
    Grid grid_;
    int m_ = 1;
    std::vector<cplx> values_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(SpectralField a, const SpectralField& b);
SpectralField operator*(cplx s, SpectralField a);
SpectralField operator*(SpectralField a, cplx s);
SpectralField operator-(SpectralField a);

// Fourier-series coefficients per component: f(x_j) = sum_k c_k exp(i xi_k (x_j + R)).
std::vector<cplx> to_spectrum(const SpectralField& f);
SpectralField from_spectrum(const Grid& grid, std::vector<cplx> coeffs, int components = 1);

// In-place transforms on one component-sized block (thread safe).
void forward_transform(const Grid& grid, cplx* data);
void inverse_transform(const Grid& grid, cplx* data);

// Zero-pad (factor > 1) the spectrum; exact for band-limited fields.
SpectralField upsample(const SpectralField& f, int factor);
// Keep the low modes of a refined field on the coarser grid.
SpectralField restrict_to(const SpectralField& f, const Grid& coarse);

// 2/3-rule truncation: modes with 3|k_j| >= n_j on any axis are removed.
SpectralField dealias(const SpectralField& f);
bool dealias_keeps(const Grid& grid, const std::array<int, kMaxDim>& slot);

}  // namespace qnls
