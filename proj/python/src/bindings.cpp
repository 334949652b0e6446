#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <set>
#include <string>
#include <vector>

#include "dscex/cesaro.hpp"
#include "dscex/errors.hpp"
#include "dscex/norms.hpp"
#include "dscex/operator.hpp"
#include "dscex/residuality.hpp"
#include "dscex/scenario.hpp"
#include "dscex/suites.hpp"

namespace py = pybind11;
using namespace dscex;

namespace {

// Strings are parsed exactly ("3/4+1/4i"); numbers are converted exactly from their double value.
ExactComplex to_exact(const py::handle& x) {
    if (py::isinstance<py::str>(x)) return parse_complex(x.cast<std::string>());
    return ExactComplex::from(x.cast<Complex>());
}

CellFunction constant_function(std::size_t chains, const py::object& value) {
    return CellFunction::constant(chains, to_exact(value));
}

std::vector<std::uint64_t> checkpoint_Ns(std::uint64_t n, unsigned t_min, unsigned t_max) {
    std::vector<std::uint64_t> out;
    for (const Checkpoint& c : checkpoint_set(n, t_min, t_max)) out.push_back(c.N);
    return out;
}

py::dict verify(const std::string& path, const std::string& suite, unsigned threads) {
    Scenario sc = path.empty() ? canonical_scenario() : load_scenario(path);
    realize(sc);
    const SuiteReport r = run_verify(sc, suite, threads);
    py::dict d;
    d["suite"] = r.suite;
    d["checks"] = r.checks;
    d["passed"] = r.passed;
    d["failed"] = r.failed();
    d["text"] = r.text();
    return d;
}

std::string simulate(const std::string& path, bool exact) {
    Scenario sc = path.empty() ? canonical_scenario() : load_scenario(path);
    if (exact) sc.exact = true;
    realize(sc);
    std::string out = csv_header();
    for (const CellIndex& s : sc.starts) {
        out += csv_rows(cesaro_report(sc.v(), s, sc.t_min, sc.t_max, sc.z0_or_default(), sc.exact));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dunford-Schwartz counterexample operator: signs, iterates, Cesaro averages, norms";

    static py::exception<Error> error(m, "Error");
    static py::exception<ConstructionError> construction(m, "ConstructionError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConstructionError& e) {
            construction(e.what());
        } catch (const Error& e) {
            error(e.what());
        }
    });

    py::class_<FactorSpace>(m, "FactorSpace")
        .def_static("uniform", [](std::size_t chains) { return FactorSpace::uniform(chains); }, py::arg("chains"))
        .def_static("parse", [](const std::string& text) { return parse_factor_space(text); }, py::arg("text"))
        .def_property_readonly("chain_count", &FactorSpace::chain_count)
        .def("weight", [](const FactorSpace& s, ChainId j, std::uint64_t n) { return s.weight({j, n}); })
        .def("__str__", [](const FactorSpace& s) { return serialize(s); });

    py::class_<CellFunction>(m, "CellFunction")
        .def_static("zero", &CellFunction::zero, py::arg("chains"))
        .def_static("constant", &constant_function, py::arg("chains"), py::arg("value"))
        .def_static("parse", [](const std::string& text) { return parse_cell_function(text); }, py::arg("text"))
        .def_property_readonly("chain_count", &CellFunction::chain_count)
        .def("value", [](const CellFunction& v, ChainId j, std::uint64_t n) { return v.value({j, n}); })
        .def("exact_value", [](const CellFunction& v, ChainId j, std::uint64_t n) { return format_complex(v.exact_value({j, n})); })
        .def("__eq__", [](const CellFunction& a, const CellFunction& b) { return a == b; })
        .def("__str__", [](const CellFunction& v) { return serialize(v); });

    m.def("floor_log3", &floor_log3, py::arg("x"));
    m.def("is_power_of_3", &is_power_of_3, py::arg("m"));
    m.def("sign_flip_count", &sign_flip_count, py::arg("n"), py::arg("m"));
    m.def("sigma", &sigma, py::arg("n"), py::arg("m"));
    m.def("psi", &psi, py::arg("n"));

    m.def("iterate", [](const CellFunction& v, ChainId j, std::uint64_t n, std::uint64_t k) { return iterate_value(v, {j, n}, k); },
          py::arg("v"), py::arg("chain"), py::arg("n"), py::arg("k"), "(S^k v)(chain, n)");
    m.def("iterate_exact",
          [](const CellFunction& v, ChainId j, std::uint64_t n, std::uint64_t k) { return format_complex(iterate_value_exact(v, {j, n}, k)); },
          py::arg("v"), py::arg("chain"), py::arg("n"), py::arg("k"));
    m.def("cesaro", [](const CellFunction& v, ChainId j, std::uint64_t n, std::uint64_t N) { return cesaro_block(v, {j, n}, N); },
          py::arg("v"), py::arg("chain"), py::arg("n"), py::arg("N"), "A_N(v; chain, n)");
    m.def("cesaro_exact",
          [](const CellFunction& v, ChainId j, std::uint64_t n, std::uint64_t N) { return format_complex(cesaro_block_exact(v, {j, n}, N)); },
          py::arg("v"), py::arg("chain"), py::arg("n"), py::arg("N"));
    m.def("checkpoints", &checkpoint_Ns, py::arg("n"), py::arg("t_min"), py::arg("t_max"), "N = 3^t - n - 1 for t in [t_min, t_max]");
    m.def("diameter_estimate",
          [](const CellFunction& v, ChainId j, unsigned t_min, unsigned t_max) { return diameter_estimate(v, j, t_min, t_max).value; },
          py::arg("v"), py::arg("chain"), py::arg("t_min") = kDefaultTMin, py::arg("t_max") = kDefaultTMax);
    m.def("margin", [](const CellFunction& v, unsigned t_min, unsigned t_max) { return margin(v, t_min, t_max).margin; },
          py::arg("v"), py::arg("t_min") = kDefaultTMin, py::arg("t_max") = kDefaultTMax);

    m.def("norm_l1", &norm_L1, py::arg("space"), py::arg("v"));
    m.def("norm_linf", &norm_Linf, py::arg("space"), py::arg("v"));
    m.def("norm_l1_plus_linf", &norm_L1_plus_Linf, py::arg("space"), py::arg("v"));
    m.def("optimal_threshold", &optimal_threshold, py::arg("space"), py::arg("v"));

    m.def("simulate", &simulate, py::arg("scenario") = "", py::arg("exact") = false,
          "CSV of the Cesaro averages at the checkpoints; empty path means the canonical scenario");
    m.def("verify", &verify, py::arg("scenario") = "", py::arg("suite") = "all", py::arg("threads") = 1);
    m.def("suite_names", &suite_names);
}
