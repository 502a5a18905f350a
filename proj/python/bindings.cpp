#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "qnls/checkpoint.hpp"
#include "qnls/errors.hpp"
#include "qnls/lemmas.hpp"
#include "qnls/norms.hpp"
#include "qnls/scenario.hpp"
#include "qnls/solver.hpp"

namespace py = pybind11;
using namespace qnls;

namespace {

using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

Grid make_grid(int dim, int points, double half_width) { return Grid(dim, points, half_width); }

std::vector<py::ssize_t> shape_of(const Grid& g) {
    std::vector<py::ssize_t> shape;
    for (int a = 0; a < g.dim(); ++a) shape.push_back(g.points(a));
    return shape;
}

SpectralField to_field(const Grid& g, const ComplexArray& a) {
    if (static_cast<std::size_t>(a.size()) != g.size())
        throw ValidationError("array has " + std::to_string(a.size()) + " entries, grid needs " +
                              std::to_string(g.size()));
    return SpectralField(g, std::vector<cplx>(a.data(), a.data() + a.size()));
}

ComplexArray to_array(const SpectralField& f) {
    ComplexArray out(shape_of(f.grid()));
    std::copy(f.values().begin(), f.values().begin() + f.component_size(), out.mutable_data());
    return out;
}

Scenario scenario_from(const std::string& text) { return parse_scenario(nlohmann::json::parse(text)); }

CommandContext context_for(const std::string& out, std::optional<std::uint64_t> seed, const std::string& profile,
                           std::ostringstream& log) {
    CommandContext ctx;
    if (!out.empty()) ctx.out = out;
    ctx.seed = seed;
    ctx.tolerance = ToleranceProfile::by_name(profile);
    ctx.log = &log;
    return ctx;
}

}  // namespace

PYBIND11_MODULE(_qnls, m) {
    m.doc() = "Spectral solver and diagnostics for viscous quasilinear Schrodinger flows";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const nlohmann::json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<Grid>(m, "Grid")
        .def(py::init(&make_grid), py::arg("dim"), py::arg("points"), py::arg("half_width"))
        .def_property_readonly("dim", &Grid::dim)
        .def_property_readonly("shape", [](const Grid& g) { return shape_of(g); })
        .def("points", &Grid::points)
        .def("half_width", &Grid::half_width)
        .def("coordinates", [](const Grid& g, int axis) { return g.coordinates(axis); })
        .def("frequencies", [](const Grid& g, int axis) { return g.frequencies(axis); })
        .def("__repr__", &Grid::describe);

    m.def("sobolev_norm", [](const Grid& g, const ComplexArray& a, double s, bool homogeneous) {
        return sobolev_norm(to_field(g, a), s, homogeneous);
    }, py::arg("grid"), py::arg("values"), py::arg("s"), py::arg("homogeneous") = false);
    m.def("l2_norm", [](const Grid& g, const ComplexArray& a) { return l2_norm(to_field(g, a)); });
    m.def("dealias", [](const Grid& g, const ComplexArray& a) { return to_array(dealias(to_field(g, a))); });

    m.def("builtin_models", &builtin_model_names);
    m.def("suite_names", &lemma_suite_names);

    m.def("canonical_scenario", [](const std::string& text) { return scenario_to_json(scenario_from(text)).dump(); },
          "Parse, validate and re-serialize a scenario (JSON text).");
    m.def("scenario_hash", [](const std::string& text) { return scenario_hash(scenario_from(text)); });

    m.def("run_scenario", [](const std::string& text) {
        Scenario s = scenario_from(text);
        s.validate();
        Trajectory traj;
        {
            py::gil_scoped_release release;
            traj = run(s.build_model(), s.initial_field(), s.solver);
        }
        py::list fields;
        for (const auto& c : traj.checkpoints) fields.append(to_array(c.field));
        return py::make_tuple(traj.times(), fields);
    }, "Run a scenario in memory; returns (times, list of checkpoint arrays).");

    m.def("run_suite", [](const std::string& name, std::uint64_t seed, int count, int points) {
        SuiteOptions o;
        o.seed = seed;
        o.count = count;
        o.points = points;
        std::vector<LemmaReport> reports;
        {
            py::gil_scoped_release release;
            reports = run_lemma_suite(name, o);
        }
        std::vector<std::string> out;
        for (const auto& r : reports) {
            auto j = r.summary();
            j["passed"] = r.passed();
            out.push_back(j.dump());
        }
        return out;
    }, py::arg("name"), py::arg("seed") = 1, py::arg("count") = 100, py::arg("points") = 128);

    m.def("encode_checkpoint", [](const Grid& g, const ComplexArray& a, double t) {
        return py::bytes(encode_checkpoint(to_field(g, a), t));
    });
    m.def("load_checkpoint", [](const std::filesystem::path& p) {
        auto c = load_checkpoint(p);
        return py::make_tuple(c.time, to_array(c.field));
    });

    // CLI verbs; each returns (exit code, log text).
    m.def("simulate", [](const std::string& text, const std::string& out, std::optional<std::uint64_t> seed,
                        const std::string& profile) {
        std::ostringstream log;
        auto ctx = context_for(out, seed, profile, log);
        auto code = cmd_simulate(scenario_from(text), ctx);
        return py::make_tuple(static_cast<int>(code), log.str());
    });
    m.def("converge", [](const std::string& text, const std::string& out, int halvings, double distance_index) {
        std::ostringstream log;
        auto ctx = context_for(out, std::nullopt, "default", log);
        auto code = cmd_converge(scenario_from(text), halvings, distance_index, ctx);
        return py::make_tuple(static_cast<int>(code), log.str());
    });
    m.def("verify_lemmas", [](const std::vector<std::string>& suites, const std::string& out, int count, int points,
                             std::optional<std::uint64_t> seed) {
        std::ostringstream log;
        auto ctx = context_for(out, seed, "default", log);
        auto code = cmd_verify_lemmas(suites, count, points, ctx);
        return py::make_tuple(static_cast<int>(code), log.str());
    });
    m.def("report", [](const std::string& run_dir) {
        std::ostringstream log;
        auto ctx = context_for("", std::nullopt, "default", log);
        auto code = cmd_report(run_dir, ctx);
        return py::make_tuple(static_cast<int>(code), log.str());
    });
    m.def("diff_run", [](const std::string& text, const std::string& out, double perturbation) {
        std::ostringstream log;
        auto ctx = context_for(out, std::nullopt, "default", log);
        auto code = cmd_diff_run(scenario_from(text), perturbation, ctx);
        return py::make_tuple(static_cast<int>(code), log.str());
    });
}
