#pragma once

#include <vector>

#include "qnls/series.hpp"
#include "qnls/solver.hpp"

namespace qnls {

// Smallest integers satisfying s1 > d/2 + 5/2, s2 > d/2 + 1 and s2 + 2 <= s1 + 1/2.
int default_s1(int d);
int default_s2(int d);
// Smallest integer with s3 + 1/2 > (d + 3)/2.
int default_s3(int d);

// Pointwise Im(phi_alpha * conj(d_k phi_alpha)), real-valued.
SpectralField momentum_density(const SpectralField& phi, const MultiIndex& alpha, int k);
SpectralField momentum_density(const Trajectory& traj, const MultiIndex& alpha, int k, std::size_t checkpoint);

// Channels: Y, Y_top (|alpha| = s1 only), Y_bound = t * sup_{s<=t} ||phi||^2_{H^s1} + Y_top.
DiagnosticSeries good_term_Y(const Trajectory& traj, int s1);
// Channels: W, W_top (|alpha| = s3 only), W_bound = t * sup_{s<=t} ||phi||^4_{H^s3} + W_top. Needs d >= 2.
DiagnosticSeries good_term_W(const Trajectory& traj, int s3);
// Channel X = ||phi||^2_{H^{s1+1/2}} + sum_k sum_{|beta|<=s2} ||<x_k>^2 phi_beta||^2.
DiagnosticSeries master_X(const Trajectory& traj, int s1, int s2);

struct ResidualOptions {
    int padding = 0;  // refinement factor for products; 0 picks 2 (quadratic) or 3 (cubic)
};

// Pointwise momentum identity residual at interior checkpoints. Channels:
// residual_L2, time_term_L2 (size of the d_t term, for scale), residual_rel.
DiagnosticSeries momentum_identity_residual(const Trajectory& traj, const MultiIndex& alpha, int k,
                                            const ResidualOptions& options = {});

// Terms of the x_k/<x_k>-weighted momentum estimate at the final checkpoint time.
EstimateLedger weighted_momentum_ledger(const Trajectory& traj, const MultiIndex& alpha, int k, int s1, int s2,
                                        const ResidualOptions& options = {});

// int_{-R}^{x_k} ||Lambda_k^{1/2} phi_beta(y_k, .)||^2 dy_k at the grid points of axis k,
// followed by the right-edge total (n + 1 values).
std::vector<double> cubic_weight_integral(const SpectralField& phi, const MultiIndex& beta, int k);
std::vector<double> cubic_weight_integral(const Trajectory& traj, const MultiIndex& beta, int k,
                                          std::size_t checkpoint);

struct WeightedEvolution {
    DiagnosticSeries series;  // x2_norm, x2_norm_sq, identity_residual
    EstimateLedger ledger;    // bound terms at the final time
};
WeightedEvolution weighted_norm_evolution(const Trajectory& traj, const MultiIndex& beta, int k,
                                          const ResidualOptions& options = {});

struct BootstrapOptions {
    int s1 = -1, s2 = -1, s3 = -1;  // defaults from the class rules
    double ceiling = 2.0;
};
struct BootstrapResult {
    DiagnosticSeries series;  // ratio channel
    double sup_ratio = 0.0;
    bool zero_data = false;
    bool exceeded = false;
};
BootstrapResult bootstrap_monitor(const Trajectory& traj, InteractionClass cls, const BootstrapOptions& options = {});

// Good terms of a difference trajectory v = phi_a - phi_b.
DiagnosticSeries difference_good_term_Y(const Trajectory& v);
DiagnosticSeries difference_good_term_W(const Trajectory& v, int s3);

// Cumulative trapezoid of samples over the given times.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f);

}  // namespace qnls
