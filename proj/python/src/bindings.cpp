#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tlsys/behavioral.hpp"
#include "tlsys/cli.hpp"
#include "tlsys/scenario.hpp"
#include "tlsys/spec.hpp"

namespace py = pybind11;
using namespace tlsys;

namespace {

// Every library error surfaces as tlsys.Error with the code as first argument.
PyObject* g_error = nullptr;

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    PyErr_SetObject(g_error, py::make_tuple(std::string(to_string(e.code())), e.message()).ptr());
    throw py::error_already_set();
  }
}

EmpiricalMeasure measure(const std::vector<double>& p, const std::optional<std::vector<double>>& coords) {
  EmpiricalMeasure m(integer_range("S", p.size()), p);
  if (coords) m.set_coordinates(*coords);
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings over the tlsys C++ library";
  m.attr("__version__") = kToolVersion;
  m.attr("SPEC_VERSION") = kSpecVersion;
  m.attr("COMPLEXITY_FORMULA") = kComplexityFormula;
  g_error = PyErr_NewException("tlsys._core.Error", PyExc_RuntimeError, nullptr);
  m.attr("Error") = py::handle(g_error);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command line tool in-process; returns (exit_code, stdout, stderr).");

  m.def(
      "canonical_spec",
      [](const std::string& text, bool strict) {
        return guarded([&] {
          std::vector<std::string> warnings;
          auto doc = parse_spec(text, ParseOptions{strict}, &warnings);
          return py::make_tuple(emit_spec(doc), warnings);
        });
      },
      py::arg("text"), py::arg("strict") = false, "Canonical text of a spec document and the lenient-mode warnings.");

  m.def(
      "analyze",
      [](const std::string& text, const std::string& kind, std::uint64_t seed, const std::string& overrides) {
        return guarded([&] {
          const auto doc = parse_spec(text);
          const auto spec = resolve(doc);
          AnalyzeFlags flags;
          flags.seed = seed;
          flags.overrides = nlohmann::json::parse(overrides.empty() ? "{}" : overrides);
          return analyze(spec, doc, kind, flags).dump();
        });
      },
      py::arg("text"), py::arg("kind") = "", py::arg("seed") = 0, py::arg("overrides") = "{}",
      "Results section of one analysis, as JSON text.");

  m.def(
      "scenario_document",
      [](const std::string& scenario_json) {
        return guarded([&] {
          const auto spec = scenario_from_json(nlohmann::json::parse(scenario_json));
          return emit_spec(document_for_pair(generate_pair(spec)));
        });
      },
      py::arg("scenario"), "Spec document for the pair a scenario block generates.");

  m.def("digest", &content_digest, py::arg("data"));

  m.def(
      "divergence",
      [](const std::vector<double>& p, const std::vector<double>& q, const std::string& kind,
         const std::optional<std::vector<double>>& coordinates) {
        return guarded([&] { return divergence(measure(p, coordinates), measure(q, coordinates), parse_divergence(kind)); });
      },
      py::arg("p"), py::arg("q"), py::arg("kind") = "TV", py::arg("coordinates") = py::none(),
      "D(p || q) over a shared support of integer atoms.");

  m.def("complexity_term", &complexity_term, py::arg("theta_count"), py::arg("n"), py::arg("eta") = kDefaultEta);
}
