#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qnls/checkpoint.hpp"
#include "qnls/model.hpp"
#include "qnls/series.hpp"

namespace qnls {

struct SolverParams {
    double epsilon = 0.0;
    double dt = 1e-3;
    double T = 1.0;
    int scheme = 2;  // 1: Lie + explicit Euler, 2: Strang + explicit midpoint
    bool dealias = true;
    int checkpoint_stride = 1;
    double monitor_s = 2.0;       // Sobolev index watched by the stability guard
    double growth_limit = 10.0;   // per-step H^s growth that rejects the step
    double smallness = 0.0;       // warn when ||phi0||_{H^s} exceeds this (0 disables)
    bool weighted = false;        // watch boundary mass at checkpoints

    void validate() const;
    long steps() const;
};

struct Trajectory {
    std::vector<Checkpoint> checkpoints;
    DiagnosticSeries diagnostics;
    SolverParams params;
    std::shared_ptr<const ModelProblem> model;
    std::vector<std::string> warnings;

    const SpectralField& final_field() const { return checkpoints.back().field; }
    std::vector<double> times() const;
};

// Applies one step with precomputed symbol tables; reuse across steps.
class Stepper {
public:
    Stepper(const ModelProblem& model, const Grid& grid, const SolverParams& params);
    SpectralField step(const SpectralField& phi) const;
    // Explicit right-hand side i*perturbation - i*F, spectral coefficients.
    std::vector<cplx> explicit_rhs(const SpectralField& phi) const;

private:
    void apply_linear(std::vector<cplx>& c, const std::vector<cplx>& factor) const;
    void mask(std::vector<cplx>& c) const;
    double monitored_norm2(const std::vector<cplx>& c) const;

    const ModelProblem& model_;
    Grid grid_;
    SolverParams params_;
    std::vector<cplx> full_, half_;
    std::vector<char> keep_;
    std::vector<double> sobolev_weight_;
};

SpectralField step(const SpectralField& phi, const ModelProblem& model, const SolverParams& params);
Trajectory run(const ModelProblem& model, const SpectralField& phi0, const SolverParams& params);

struct ContinuationMember {
    double epsilon = 0.0;
    Trajectory trajectory;
    double distance_to_next = 0.0;  // ||phi_eps - phi_{eps/2}||_{H^s'} at T (last member: 0)
    bool failed = false;
    std::string failure;
};

struct ContinuationResult {
    std::vector<ContinuationMember> members;
    double distance_index = 0.0;
    bool partial = false;
};

ContinuationResult viscosity_continuation(const ModelProblem& model, const SpectralField& phi0,
                                          const SolverParams& params, int halvings, double distance_index);

struct DifferenceRunOptions {
    int s3 = -1;  // index for W_v (d >= 2); default from the cubic rule
};

DiagnosticSeries difference_run(const ModelProblem& model, const SpectralField& phi0_a, const SpectralField& phi0_b,
                                const SolverParams& params, const DifferenceRunOptions& options = {});

}  // namespace qnls
