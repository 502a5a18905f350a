#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnls/model.hpp"
#include "qnls/solver.hpp"

namespace qnls {

enum class ExitCode : int { ok = 0, validation = 2, numerical = 3, threshold = 4 };

struct InitialData {
    std::string family = "gaussian";  // gaussian | plane-wave | random-band-limited
    double amplitude = 1e-3;
    double width = 1.0;
    std::vector<double> center;      // per axis, default 0
    std::vector<double> wavevector;  // per axis, default 0 (gaussian carrier or plane-wave frequency)
    std::uint64_t seed = 1;
    double cutoff = 1.0 / 3.0;  // random-band-limited: fraction of Nyquist
    double window = 0.125;      // random-band-limited: Gaussian window, fraction of R (0 for none)
};

struct Diagnostics {
    std::vector<std::string> functionals;  // Y, W, X, momentum_residual, momentum_ledger, weighted_evolution, bootstrap
    int s1 = -1, s2 = -1, s3 = -1;         // -1 takes the class defaults
    std::vector<MultiIndex> alpha;         // default {0}
    std::vector<MultiIndex> beta;          // default {0}
    std::vector<int> axes;                 // default {0}
    double bootstrap_ceiling = 2.0;
};

struct Scenario {
    std::string model = "free";           // built-in name, or "custom" with custom_model set
    std::optional<CustomModelSpec> custom;
    int positive_count = -1;              // signature; -1 means elliptic
    int dim = 1;
    std::vector<int> points{256};
    std::vector<double> half_width{20.0};
    InitialData data;
    SolverParams solver;
    Diagnostics diagnostics;
    std::string output = "runs/default";

    Grid grid() const;
    ModelProblem build_model() const;
    SpectralField initial_field() const;
    void validate() const;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& s);
// Hash of the canonical JSON serialization.
std::string scenario_hash(const Scenario& s);

SpectralField make_initial_data(const Grid& grid, const InitialData& data);

struct ToleranceProfile {
    std::string name = "default";
    double identity = 1e-6;
    double boundary_fraction = 1e-6;
    double bootstrap_ceiling_scale = 1.0;
    static ToleranceProfile by_name(const std::string& name);
};

struct CommandContext {
    std::filesystem::path out;  // empty: take the scenario's output entry
    std::optional<std::uint64_t> seed;
    ToleranceProfile tolerance;
    std::ostream* log = nullptr;  // progress and summaries
};

// Each command returns its exit code; validation errors are raised as exceptions
// by the parsing layer and mapped by the caller.
ExitCode cmd_simulate(const Scenario& scenario, const CommandContext& ctx);
ExitCode cmd_converge(const Scenario& scenario, int halvings, double distance_index, const CommandContext& ctx);
ExitCode cmd_verify_lemmas(const std::vector<std::string>& suites, int count, int points, const CommandContext& ctx);
ExitCode cmd_report(const std::filesystem::path& run_dir, const CommandContext& ctx);
ExitCode cmd_diff_run(const Scenario& scenario, double perturbation, const CommandContext& ctx);

// Manifest helpers: every written file is recorded with its git blob hash.
class RunRecorder {
public:
    explicit RunRecorder(std::filesystem::path dir);
    const std::filesystem::path& dir() const { return dir_; }
    void write_text(const std::string& relative, const std::string& content);
    void record_file(const std::string& relative);
    nlohmann::json manifest = nlohmann::json::object();
    void finish(double wall_seconds);

private:
    std::filesystem::path dir_;
};

// Re-hashes every file listed in a manifest; returns the mismatching paths.
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir, nlohmann::json* manifest = nullptr);

}  // namespace qnls
