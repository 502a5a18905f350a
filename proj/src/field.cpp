#include "qnls/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "qnls/errors.hpp"

namespace qnls {

namespace {

// FFTW planning is not thread safe; execution on fresh arrays is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(const Grid& grid, int sign) {
        Key key{grid.dim(), grid.points(0), grid.points(1), grid.points(2), sign};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        int dims[kMaxDim];
        for (int a = 0; a < grid.dim(); ++a) dims[a] = grid.points(a);
        std::vector<cplx> scratch(grid.size());
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft(grid.dim(), dims, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw NumericalError("FFTW failed to create a plan for " + grid.describe());
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    using Key = std::tuple<int, int, int, int, int>;
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

void check_same_shape(const SpectralField& a, const SpectralField& b) {
    if (a.grid() != b.grid() || a.components() != b.components())
        throw ValidationError("field shape mismatch");
}

}  // namespace

void forward_transform(const Grid& grid, cplx* data) {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(PlanCache::instance().get(grid, FFTW_FORWARD), p, p);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) data[i] *= scale;
}

void inverse_transform(const Grid& grid, cplx* data) {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(PlanCache::instance().get(grid, FFTW_BACKWARD), p, p);
}

SpectralField::SpectralField(const Grid& grid, int components)
    : grid_(grid), m_(components), values_(grid.size() * components, cplx(0.0, 0.0)) {
    if (components < 1) throw ValidationError("component count must be >= 1");
}

SpectralField::SpectralField(const Grid& grid, std::vector<cplx> values, int components)
    : grid_(grid), m_(components), values_(std::move(values)) {
    if (components < 1) throw ValidationError("component count must be >= 1");
    if (values_.size() != grid.size() * components) throw ValidationError("field value count does not match grid");
}

SpectralField SpectralField::from_function(const Grid& grid, const std::function<cplx(const double*)>& f) {
    SpectralField out(grid);
    double x[kMaxDim] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto idx = grid.unravel(i);
        for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinates(a)[idx[a]];
        out.values_[i] = f(x);
    }
    return out;
}

std::span<const cplx> SpectralField::component(int c) const {
    return {values_.data() + c * grid_.size(), grid_.size()};
}

std::span<cplx> SpectralField::component(int c) { return {values_.data() + c * grid_.size(), grid_.size()}; }

bool SpectralField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

bool SpectralField::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](cplx v) { return v == cplx(0.0, 0.0); });
}

double SpectralField::max_abs() const {
    double m = 0.0;
    for (auto v : values_) m = std::max(m, std::abs(v));
    return m;
}

SpectralField SpectralField::map(const std::function<cplx(cplx)>& f) const {
    SpectralField out = *this;
    for (auto& v : out.values_) v = f(v);
    return out;
}

SpectralField SpectralField::conj() const {
    return map([](cplx v) { return std::conj(v); });
}
SpectralField SpectralField::real_part() const {
    return map([](cplx v) { return cplx(v.real(), 0.0); });
}
SpectralField SpectralField::imag_part() const {
    return map([](cplx v) { return cplx(v.imag(), 0.0); });
}
SpectralField SpectralField::abs2() const {
    return map([](cplx v) { return cplx(std::norm(v), 0.0); });
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    check_same_shape(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
    check_same_shape(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}
SpectralField& SpectralField::operator*=(const SpectralField& o) {
    check_same_shape(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
    return *this;
}
SpectralField& SpectralField::operator*=(cplx a) {
    for (auto& v : values_) v *= a;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(SpectralField a, const SpectralField& b) { return a *= b; }
SpectralField operator*(cplx s, SpectralField a) { return a *= s; }
SpectralField operator*(SpectralField a, cplx s) { return a *= s; }
SpectralField operator-(SpectralField a) { return a *= cplx(-1.0, 0.0); }

std::vector<cplx> to_spectrum(const SpectralField& f) {
    std::vector<cplx> c = f.values();
    for (int k = 0; k < f.components(); ++k) forward_transform(f.grid(), c.data() + k * f.grid().size());
    return c;
}

SpectralField from_spectrum(const Grid& grid, std::vector<cplx> coeffs, int components) {
    for (int k = 0; k < components; ++k) inverse_transform(grid, coeffs.data() + k * grid.size());
    return SpectralField(grid, std::move(coeffs), components);
}

namespace {

// Copy spectral coefficients between grids of the same box, matching signed wavenumbers.
// Nyquist slots of the source are split evenly when moving to a finer grid so that
// real fields stay real; they are dropped when moving to a coarser grid.
std::vector<cplx> transfer_spectrum(const Grid& from, const std::vector<cplx>& src, const Grid& to) {
    std::vector<cplx> dst(to.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (src[i] == cplx(0.0, 0.0)) continue;
        auto idx = from.unravel(i);
        std::size_t target = 0;
        bool keep = true;
        double weight = 1.0;
        std::array<int, kMaxDim> mirror_k{0, 0, 0};
        int nyquist_axes = 0;
        for (int a = 0; a < from.dim(); ++a) {
            int k = from.wavenumber(a, idx[a]);
            mirror_k[a] = k;
            if (2 * std::abs(k) == from.points(a)) {
                if (to.points(a) <= from.points(a)) {
                    keep = false;
                    break;
                }
                ++nyquist_axes;
            }
            if (2 * std::abs(k) >= to.points(a) && to.points(a) < from.points(a)) {
                keep = false;
                break;
            }
        }
        if (!keep) continue;
        // Distribute over the 2^nyquist_axes sign choices.
        const int combos = 1 << nyquist_axes;
        weight = 1.0 / combos;
        for (int c = 0; c < combos; ++c) {
            int bit = 0;
            target = 0;
            for (int a = 0; a < from.dim(); ++a) {
                int k = mirror_k[a];
                if (2 * std::abs(k) == from.points(a)) {
                    k = ((c >> bit) & 1) ? std::abs(k) : -std::abs(k);
                    ++bit;
                }
                int slot = k >= 0 ? k : k + to.points(a);
                target += static_cast<std::size_t>(slot) * to.stride(a);
            }
            dst[target] += src[i] * weight;
        }
    }
    return dst;
}

}  // namespace

SpectralField upsample(const SpectralField& f, int factor) {
    if (factor < 1) throw ValidationError("upsample factor must be >= 1");
    if (factor == 1) return f;
    Grid fine = f.grid().refined(factor);
    auto c = to_spectrum(f);
    std::vector<cplx> out;
    out.reserve(fine.size() * f.components());
    for (int k = 0; k < f.components(); ++k) {
        std::vector<cplx> block(c.begin() + k * f.grid().size(), c.begin() + (k + 1) * f.grid().size());
        auto t = transfer_spectrum(f.grid(), block, fine);
        out.insert(out.end(), t.begin(), t.end());
    }
    return from_spectrum(fine, std::move(out), f.components());
}

SpectralField restrict_to(const SpectralField& f, const Grid& coarse) {
    for (int a = 0; a < coarse.dim(); ++a)
        if (coarse.half_width(a) != f.grid().half_width(a) || coarse.dim() != f.grid().dim())
            throw ValidationError("restrict_to requires the same box");
    auto c = to_spectrum(f);
    std::vector<cplx> out;
    for (int k = 0; k < f.components(); ++k) {
        std::vector<cplx> block(c.begin() + k * f.grid().size(), c.begin() + (k + 1) * f.grid().size());
        auto t = transfer_spectrum(f.grid(), block, coarse);
        out.insert(out.end(), t.begin(), t.end());
    }
    return from_spectrum(coarse, std::move(out), f.components());
}

bool dealias_keeps(const Grid& grid, const std::array<int, kMaxDim>& slot) {
    for (int a = 0; a < grid.dim(); ++a)
        if (3 * std::abs(grid.wavenumber(a, slot[a])) >= grid.points(a)) return false;
    return true;
}

SpectralField dealias(const SpectralField& f) {
    auto c = to_spectrum(f);
    const Grid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (dealias_keeps(g, g.unravel(i))) continue;
        for (int k = 0; k < f.components(); ++k) c[k * g.size() + i] = cplx(0.0, 0.0);
    }
    return from_spectrum(g, std::move(c), f.components());
}

}  // namespace qnls
