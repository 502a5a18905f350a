#include "qnls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qnls/errors.hpp"

namespace qnls {

Grid::Grid(int dim, int n, double half_width) : Grid(dim, {n, n, n}, {half_width, half_width, half_width}) {}

Grid::Grid(int dim, std::array<int, kMaxDim> n, std::array<double, kMaxDim> half_width)
    : dim_(dim), n_(n), R_(half_width) {
    if (dim < 1 || dim > kMaxDim) throw ValidationError("grid.dim must be 1, 2 or 3");
    for (int a = 0; a < dim; ++a) {
        if (n_[a] < 8 || n_[a] % 2 != 0)
            throw ValidationError("grid.points must be even and >= 8 on every axis");
        if (!(R_[a] > 0.0) || !std::isfinite(R_[a]))
            throw ValidationError("grid.half_width must be positive and finite");
    }
    for (int a = dim; a < kMaxDim; ++a) {
        n_[a] = 1;
        R_[a] = 1.0;
    }
    build();
}

void Grid::build() {
    size_ = 1;
    for (int a = kMaxDim - 1; a >= 0; --a) {
        stride_[a] = size_;
        size_ *= static_cast<std::size_t>(n_[a]);
    }
    for (int a = 0; a < kMaxDim; ++a) {
        x_[a].assign(n_[a], 0.0);
        xi_[a].assign(n_[a], 0.0);
        if (a >= dim_) continue;
        for (int j = 0; j < n_[a]; ++j) {
            x_[a][j] = coordinate(a, j);
            xi_[a][j] = frequency(a, j);
        }
    }
}

double Grid::frequency(int axis, int j) const {
    return std::numbers::pi * wavenumber(axis, j) / R_[axis];
}

double Grid::nyquist(int axis) const { return std::numbers::pi * (n_[axis] / 2) / R_[axis]; }

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
}

double Grid::box_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= 2.0 * R_[a];
    return v;
}

std::array<int, kMaxDim> Grid::unravel(std::size_t flat) const {
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (int a = 0; a < kMaxDim; ++a) {
        idx[a] = static_cast<int>(flat / stride_[a]);
        flat %= stride_[a];
    }
    return idx;
}

Grid Grid::refined(int factor) const {
    std::array<int, kMaxDim> n = n_;
    for (int a = 0; a < dim_; ++a) n[a] *= factor;
    return Grid(dim_, n, R_);
}

bool Grid::operator==(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_ && R_ == o.R_; }

std::string Grid::describe() const {
    std::ostringstream s;
    s << "d=" << dim_ << " n=";
    for (int a = 0; a < dim_; ++a) s << (a ? "x" : "") << n_[a];
    s << " R=" << R_[0];
    return s.str();
}

MultiIndex MultiIndex::unit(int d, int axis) {
    MultiIndex m = zero(d);
    m.orders[axis] = 1;
    return m;
}

int MultiIndex::total() const {
    int t = 0;
    for (int i = 0; i < dim; ++i) t += orders[i];
    return t;
}

MultiIndex MultiIndex::plus(int axis, int count) const {
    MultiIndex m = *this;
    m.orders[axis] += count;
    return m;
}

std::string MultiIndex::label() const {
    std::string s = "(";
    for (int i = 0; i < dim; ++i) {
        if (i) s += ",";
        s += std::to_string(orders[i]);
    }
    return s + ")";
}

std::vector<MultiIndex> multi_indices(int dim, int lo, int hi) {
    std::vector<MultiIndex> out;
    for (int total = std::max(lo, 0); total <= hi; ++total) {
        if (dim == 1) {
            out.push_back(MultiIndex(1, {total, 0, 0}));
        } else if (dim == 2) {
            for (int a = total; a >= 0; --a) out.push_back(MultiIndex(2, {a, total - a, 0}));
        } else {
            for (int a = total; a >= 0; --a)
                for (int b = total - a; b >= 0; --b) out.push_back(MultiIndex(3, {a, b, total - a - b}));
        }
    }
    return out;
}

}  // namespace qnls
