#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regincl/io.hpp"

namespace py = pybind11;
using namespace regincl;

namespace {

RunOptions options(std::uint64_t seed, double tolerance, int max_iterations, int restarts, int depth_max) {
    RunOptions o;
    o.solver.seed = seed;
    o.solver.tolerance = tolerance;
    o.solver.max_iterations = max_iterations;
    o.solver.restarts = restarts;
    o.solver.validate();
    o.depth_max = depth_max;
    return o;
}

std::pair<std::string, int> finish(const RunResult &r) { return {render_machine(r.report), r.exit_code}; }

// Errors that the CLI turns into exit codes surface here as Python exceptions.
template <class F> std::pair<std::string, int> guarded(F &&f) {
    try {
        return f();
    } catch (const ParseError &e) {
        throw py::value_error(e.what());
    } catch (const ValidationError &e) {
        throw py::value_error(e.what());
    }
}

} // namespace

PYBIND11_MODULE(_regincl, m) {
    m.doc() = "Regular inclusions of finite-dimensional algebras: native core";

    const SolverConfig defaults;

    m.def(
        "analyze",
        [](const std::string &doc, std::uint64_t seed, double tol, int iters, int restarts, int depth_max) {
            return guarded([&] {
                return finish(run_analyze(parse_descriptor_document(doc), options(seed, tol, iters, restarts, depth_max)));
            });
        },
        py::arg("descriptor_json"), py::arg("seed") = defaults.seed, py::arg("tolerance") = defaults.tolerance,
        py::arg("max_iterations") = defaults.max_iterations, py::arg("restarts") = defaults.restarts,
        py::arg("depth_max") = kDefaultDepthMax);
    m.def(
        "build_basis",
        [](const std::string &doc, std::uint64_t seed, double tol, int iters, int restarts, int depth_max) {
            return guarded([&] {
                py::gil_scoped_release release;
                return finish(
                    run_build_basis(parse_descriptor_document(doc), options(seed, tol, iters, restarts, depth_max)));
            });
        },
        py::arg("descriptor_json"), py::arg("seed") = defaults.seed, py::arg("tolerance") = defaults.tolerance,
        py::arg("max_iterations") = defaults.max_iterations, py::arg("restarts") = defaults.restarts,
        py::arg("depth_max") = kDefaultDepthMax);
    m.def(
        "verify",
        [](const std::string &doc, const std::string &basis) {
            return guarded([&] {
                return finish(run_verify(parse_descriptor_document(doc), nlohmann::json::parse(basis)));
            });
        },
        py::arg("descriptor_json"), py::arg("basis_json"));
    m.def(
        "canonicalize",
        [](const std::string &doc) { return guarded([&] { return finish(run_canonicalize(parse_descriptor_document(doc))); }); },
        py::arg("descriptor_json"));
    m.def(
        "decompose",
        [](const std::string &doc) { return guarded([&] { return finish(run_decompose(parse_descriptor_document(doc))); }); },
        py::arg("descriptor_json"));
    m.def(
        "depth",
        [](const std::string &doc, int depth_max) {
            RunOptions o;
            o.depth_max = depth_max;
            return guarded([&] { return finish(run_depth(parse_descriptor_document(doc), o)); });
        },
        py::arg("descriptor_json"), py::arg("depth_max") = kDefaultDepthMax);
}
