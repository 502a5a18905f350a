#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace qnls {

constexpr int kMaxDim = 3;

// Periodic box [-R, R)^d sampled with n points per axis, row-major storage
// (axis 0 varies slowest). Frequencies xi = pi*k/R.
class Grid {
public:
    Grid() = default;
    Grid(int dim, int n, double half_width);
    Grid(int dim, std::array<int, kMaxDim> n, std::array<double, kMaxDim> half_width);

    int dim() const { return dim_; }
    int points(int axis) const { return n_[axis]; }
    double half_width(int axis) const { return R_[axis]; }
    const std::array<int, kMaxDim>& shape() const { return n_; }
    std::size_t size() const { return size_; }
    std::size_t stride(int axis) const { return stride_[axis]; }

    double spacing(int axis) const { return 2.0 * R_[axis] / n_[axis]; }
    double cell_volume() const;
    double box_volume() const;

    double coordinate(int axis, int j) const { return -R_[axis] + j * spacing(axis); }
    // Signed integer wavenumber of FFT slot j (Nyquist slot maps to -n/2).
    int wavenumber(int axis, int j) const { return j < n_[axis] / 2 ? j : j - n_[axis]; }
    double frequency(int axis, int j) const;
    double nyquist(int axis) const;

    // Per-axis tables, cached.
    const std::vector<double>& coordinates(int axis) const { return x_[axis]; }
    const std::vector<double>& frequencies(int axis) const { return xi_[axis]; }

    std::array<int, kMaxDim> unravel(std::size_t flat) const;

    // Same box, every axis scaled by factor points.
    Grid refined(int factor) const;

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }
    std::string describe() const;

private:
    void build();

    int dim_ = 1;
    std::array<int, kMaxDim> n_{1, 1, 1};
    std::array<double, kMaxDim> R_{1.0, 1.0, 1.0};
    std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
    std::size_t size_ = 1;
    std::array<std::vector<double>, kMaxDim> x_;
    std::array<std::vector<double>, kMaxDim> xi_;
};

// Multi-index alpha = (alpha_1, ..., alpha_d); phi_alpha = d^alpha phi.
struct MultiIndex {
    std::array<int, kMaxDim> orders{0, 0, 0};
    int dim = 1;

    MultiIndex() = default;
    MultiIndex(int d, std::array<int, kMaxDim> o) : orders(o), dim(d) {}
    static MultiIndex zero(int d) { return MultiIndex(d, {0, 0, 0}); }
    static MultiIndex unit(int d, int axis);

    int total() const;
    int operator[](int i) const { return orders[i]; }
    MultiIndex plus(int axis, int count = 1) const;
    bool operator==(const MultiIndex& o) const { return dim == o.dim && orders == o.orders; }
    std::string label() const;
};

// All multi-indices with lo <= |alpha| <= hi in graded lexicographic order.
std::vector<MultiIndex> multi_indices(int dim, int lo, int hi);

}  // namespace qnls
