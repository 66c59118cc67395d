// Copyright 2026 The covlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covlab/errors.hpp"
#include "covlab/harness.hpp"
#include "covlab/report.hpp"
#include "covlab/spin.hpp"

namespace py = pybind11;
using namespace covlab;

namespace {

RunConfig config_from_text(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::parse(in);
}

std::string deform_json(const RunConfig& c) {
  const DeformRun run = run_deform(c);
  nlohmann::ordered_json j;
  j["gamma"] = run.deformation.gamma;
  j["pass"] = run.certificate.all_pass();
  j["clauses"] = nlohmann::ordered_json::array();
  for (const auto& cl : run.certificate.clauses)
    j["clauses"].push_back({{"clause", cl.clause}, {"pass", cl.pass}, {"margin", cl.margin}, {"detail", cl.detail}});
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_covlab, m) {
  m.doc() = "covlab core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DiagnosticError>(m, "DiagnosticError", PyExc_RuntimeError);
  py::register_exception<CovarianceError>(m, "CovarianceError", PyExc_RuntimeError);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("load", &RunConfig::load, py::arg("path"))
      .def_static("parse", &config_from_text, py::arg("text"))
      .def("validate", &RunConfig::validate)
      .def("scale_tolerances", &RunConfig::scale_tolerances, py::arg("factor"))
      .def("to_json", [](const RunConfig& c) { return c.to_json().dump(); })
      .def_readwrite("nt", &RunConfig::nt)
      .def_readwrite("nx", &RunConfig::nx)
      .def_readwrite("scalar_mass", &RunConfig::scalar_mass)
      .def_readwrite("dirac_mass", &RunConfig::dirac_mass)
      .def_readwrite("fock_cutoff", &RunConfig::fock_cutoff)
      .def_readwrite("point_t", &RunConfig::point_t)
      .def_readwrite("point_x1", &RunConfig::point_x1)
      .def_readwrite("point_x2", &RunConfig::point_x2)
      .def_readwrite("random_triples", &RunConfig::random_triples)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_property(
          "sabotage", [](const RunConfig& c) { return to_string(c.sabotage); },
          [](RunConfig& c, const std::string& s) { c.sabotage = sabotage_from_string(s); });

  m.def("run_spinstat_json", [](const RunConfig& c) { return run_spinstat(c).to_json().dump(); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("recheck_report_json",
        [](const std::string& doc) { return recheck_report(nlohmann::ordered_json::parse(doc)); }, py::arg("report"));
  m.def("ccr_check_json", [](const RunConfig& c) { return run_ccr_check(c).to_json().dump(); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("car_check_json", [](const RunConfig& c) { return run_car_check(c).to_json().dump(); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("functor_check_json", [](const RunConfig& c) { return run_functor_check(c).to_json().dump(); },
        py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("deform_json", &deform_json, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("causal_query_csv",
        [](const RunConfig& c, const std::string& queries) {
          std::istringstream in(queries);
          return causal_query_csv(c, in);
        },
        py::arg("config"), py::arg("queries"));

  m.def("covering_map", [](const Eigen::Matrix2cd& s) { return Eigen::Matrix4d(covering_map(SL2CElement(s)).m); },
        py::arg("s"));
  m.def("spin_type",
        [](int k, int l) { return to_string(spin_type(SpinRep::complex_irreducible(k, l))); }, py::arg("k"),
        py::arg("l"));
  m.def("schlieder_check",
        [](int d1, int d2, const Eigen::MatrixXcd& a1, const Eigen::MatrixXcd& a2) {
          return to_string(schlieder_check(FactorModel(d1, d2), a1, a2));
        },
        py::arg("d1"), py::arg("d2"), py::arg("a1"), py::arg("a2"));
}
