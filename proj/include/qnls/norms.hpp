#pragma once

#include <string>
#include <vector>

#include "qnls/field.hpp"

namespace qnls {

double l2_norm(const SpectralField& f);
double lp_norm(const SpectralField& f, double p);  // p = infinity gives max |f|
double linf_norm(const SpectralField& f);
double integral_abs(const SpectralField& f);
cplx integral(const SpectralField& f);
cplx inner_product(const SpectralField& f, const SpectralField& g);  // int f conj(g)

// ||J^s f||_{L^2}, or ||D^s f||_{L^2} when homogeneous.
double sobolev_norm(const SpectralField& f, double s, bool homogeneous = false);

constexpr int kDefaultBmoDepth = 6;
// Max over dyadic sub-cubes (levels 0..depth) of the mean absolute deviation.
double bmo_norm(const SpectralField& f, int depth = kDefaultBmoDepth);

constexpr double kDefaultBoundaryFraction = 1e-6;
// Cells with |x_k| >= kBoundaryBand * R count as boundary cells.
constexpr double kBoundaryBand = 0.9;

struct WeightedNorm {
    double value = 0.0;
    double boundary_fraction = 0.0;  // weighted mass share carried by boundary cells
    bool warning = false;
};

// ||<x_k>^p f||_{L^2}, <x> = 1 + |x|.
WeightedNorm weighted_L2(const SpectralField& f, int axis, double power,
                         double threshold = kDefaultBoundaryFraction);
double weighted_L2_norm(const SpectralField& f, int axis, double power);

// Share of |f|^2 mass in the boundary band of any axis.
double boundary_mass_fraction(const SpectralField& f);

// L^2 norm over the hyperplane x_k = x_j (|f(x_j)| in one dimension).
double slice_L2_norm(const SpectralField& f, int axis, int j);
// All slices at once: entry j is the squared slice norm.
std::vector<double> slice_profile(const SpectralField& f, int axis);

inline double bracket(double x) { return 1.0 + (x < 0 ? -x : x); }

}  // namespace qnls
