#include "qnls/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnls/errors.hpp"

namespace qnls {

double l2_norm(const SpectralField& f) {
    double s = 0.0;
    for (auto v : f.values()) s += std::norm(v);
    return std::sqrt(s * f.grid().cell_volume());
}

double linf_norm(const SpectralField& f) { return f.max_abs(); }

double lp_norm(const SpectralField& f, double p) {
    if (std::isinf(p)) return linf_norm(f);
    if (!(p > 0.0)) throw ValidationError("L^p exponent must be positive");
    double s = 0.0;
    for (auto v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double integral_abs(const SpectralField& f) { return lp_norm(f, 1.0); }

cplx integral(const SpectralField& f) {
    cplx s(0.0, 0.0);
    for (auto v : f.values()) s += v;
    return s * f.grid().cell_volume();
}

cplx inner_product(const SpectralField& f, const SpectralField& g) {
    if (f.size() != g.size()) throw ValidationError("inner product shape mismatch");
    cplx s(0.0, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::conj(g[i]);
    return s * f.grid().cell_volume();
}

double sobolev_norm(const SpectralField& f, double s, bool homogeneous) {
    const Grid& g = f.grid();
    auto c = to_spectrum(f);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto idx = g.unravel(i);
        double q = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            double x = g.frequencies(a)[idx[a]];
            q += x * x;
        }
        double w;
        if (homogeneous)
            w = q == 0.0 ? 0.0 : std::pow(q, s);
        else
            w = std::pow(1.0 + q, s);
        for (int k = 0; k < f.components(); ++k) total += w * std::norm(c[k * g.size() + i]);
    }
    return std::sqrt(total * g.box_volume());
}

double bmo_norm(const SpectralField& f, int depth) {
    const Grid& g = f.grid();
    const int d = g.dim();
    double best = 0.0;
    for (int level = 0; level <= depth; ++level) {
        const int blocks = 1 << level;
        bool resolvable = true;
        for (int a = 0; a < d; ++a) resolvable = resolvable && g.points(a) >= blocks;
        if (!resolvable) break;
        int cubes = 1;
        for (int a = 0; a < d; ++a) cubes *= blocks;
        std::vector<int> cube_of(g.size());
        std::vector<int> count(cubes, 0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto idx = g.unravel(i);
            int id = 0;
            for (int a = 0; a < d; ++a)
                id = id * blocks + static_cast<int>(static_cast<long>(idx[a]) * blocks / g.points(a));
            cube_of[i] = id;
            ++count[id];
        }
        for (int k = 0; k < f.components(); ++k) {
            auto v = f.component(k);
            std::vector<cplx> mean(cubes, cplx(0.0, 0.0));
            for (std::size_t i = 0; i < g.size(); ++i) mean[cube_of[i]] += v[i];
            for (int c = 0; c < cubes; ++c) mean[c] /= static_cast<double>(count[c]);
            std::vector<double> dev(cubes, 0.0);
            for (std::size_t i = 0; i < g.size(); ++i) dev[cube_of[i]] += std::abs(v[i] - mean[cube_of[i]]);
            for (int c = 0; c < cubes; ++c) best = std::max(best, dev[c] / count[c]);
        }
    }
    return best;
}

WeightedNorm weighted_L2(const SpectralField& f, int axis, double power, double threshold) {
    if (power < 0.0) throw ValidationError("weight power must be >= 0");
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw ValidationError("weight axis out of range");
    const auto& x = g.coordinates(axis);
    std::vector<double> w(g.points(axis));
    std::vector<char> edge(g.points(axis));
    for (int j = 0; j < g.points(axis); ++j) {
        w[j] = std::pow(bracket(x[j]), 2.0 * power);
        edge[j] = std::abs(x[j]) >= kBoundaryBand * g.half_width(axis);
    }
    double total = 0.0, boundary = 0.0;
    for (int k = 0; k < f.components(); ++k) {
        auto v = f.component(k);
        for (std::size_t i = 0; i < g.size(); ++i) {
            int j = static_cast<int>((i / g.stride(axis)) % g.points(axis));
            double m = w[j] * std::norm(v[i]);
            total += m;
            if (edge[j]) boundary += m;
        }
    }
    WeightedNorm out;
    out.value = std::sqrt(total * g.cell_volume());
    out.boundary_fraction = total > 0.0 ? boundary / total : 0.0;
    out.warning = out.boundary_fraction > threshold;
    return out;
}

double weighted_L2_norm(const SpectralField& f, int axis, double power) { return weighted_L2(f, axis, power).value; }

double boundary_mass_fraction(const SpectralField& f) {
    const Grid& g = f.grid();
    double total = 0.0, boundary = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto idx = g.unravel(i);
        bool edge = false;
        for (int a = 0; a < g.dim(); ++a)
            edge = edge || std::abs(g.coordinates(a)[idx[a]]) >= kBoundaryBand * g.half_width(a);
        for (int k = 0; k < f.components(); ++k) {
            double m = std::norm(f.component(k)[i]);
            total += m;
            if (edge) boundary += m;
        }
    }
    return total > 0.0 ? boundary / total : 0.0;
}

std::vector<double> slice_profile(const SpectralField& f, int axis) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw ValidationError("slice axis out of range");
    std::vector<double> out(g.points(axis), 0.0);
    for (int k = 0; k < f.components(); ++k) {
        auto v = f.component(k);
        for (std::size_t i = 0; i < g.size(); ++i) {
            int j = static_cast<int>((i / g.stride(axis)) % g.points(axis));
            out[j] += std::norm(v[i]);
        }
    }
    const double transverse = g.cell_volume() / g.spacing(axis);
    for (auto& v : out) v *= transverse;
    return out;
}

double slice_L2_norm(const SpectralField& f, int axis, int j) {
    if (j < 0 || j >= f.grid().points(axis)) throw ValidationError("slice index out of range");
    return std::sqrt(slice_profile(f, axis)[j]);
}

}  // namespace qnls
