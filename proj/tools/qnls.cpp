#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qnls/errors.hpp"
#include "qnls/parallel.hpp"
#include "qnls/scenario.hpp"

namespace {

int as_int(qnls::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral experiments for viscous quasilinear Schrodinger flows"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config, out, profile = "default";
    std::optional<std::uint64_t> seed;
    int threads = 0;
    app.add_option("--config", config, "Scenario file (JSON)");
    app.add_option("--seed", seed, "Override the random seed");
    app.add_option("--out", out, "Output directory (overrides the scenario entry)");
    app.add_option("--threads", threads, "Worker threads (QNLS_THREADS still caps this)")->check(CLI::NonNegativeNumber);
    app.add_option("--tolerance-profile", profile, "Tolerance profile")
        ->check(CLI::IsMember({"strict", "default"}));

    auto* simulate = app.add_subcommand("simulate", "Run the solver and write diagnostics");

    int halvings = 3;
    double distance_index = 3.0;
    auto* converge = app.add_subcommand("converge", "Viscosity continuation table");
    converge->add_option("--halvings", halvings, "Number of epsilon halvings");
    converge->add_option("--distance-index", distance_index, "Sobolev index of the distance");

    std::vector<std::string> suites;
    int count = 100, points = 128;
    auto* lemmas = app.add_subcommand("verify-lemmas", "Run numerical lemma suites");
    lemmas->add_option("suites", suites, "Suite names (none selected is a no-op)");
    lemmas->add_option("--count", count, "Samples per ensemble")->check(CLI::PositiveNumber);
    lemmas->add_option("--points", points, "Points per axis")->check(CLI::PositiveNumber);

    std::string run_dir;
    auto* report = app.add_subcommand("report", "Summarize a run directory after verifying its hashes");
    report->add_option("run_dir", run_dir, "Run directory")->required();

    double perturbation = 1e-6;
    auto* diff = app.add_subcommand("diff-run", "Two runs from nearby data; tracks the difference");
    diff->add_option("--perturbation", perturbation, "H^{1/2} size of the data difference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : as_int(qnls::ExitCode::validation);
    }

    try {
        if (threads > 0) qnls::set_thread_override(threads);
        qnls::CommandContext ctx;
        ctx.out = out;
        ctx.seed = seed;
        ctx.tolerance = qnls::ToleranceProfile::by_name(profile);
        ctx.log = &std::cout;

        auto scenario = [&] {
            if (config.empty()) throw qnls::ValidationError("--config is required for this command");
            return qnls::load_scenario(config);
        };
        qnls::ExitCode rc = qnls::ExitCode::ok;
        if (*simulate)
            rc = qnls::cmd_simulate(scenario(), ctx);
        else if (*converge)
            rc = qnls::cmd_converge(scenario(), halvings, distance_index, ctx);
        else if (*lemmas)
            rc = qnls::cmd_verify_lemmas(suites, count, points, ctx);
        else if (*report)
            rc = qnls::cmd_report(run_dir, ctx);
        else if (*diff)
            rc = qnls::cmd_diff_run(scenario(), perturbation, ctx);
        return as_int(rc);
    } catch (const qnls::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return as_int(qnls::ExitCode::validation);
    } catch (const qnls::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return as_int(qnls::ExitCode::numerical);
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return as_int(qnls::ExitCode::numerical);
    }
}
