#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "domcert/certificate.hpp"
#include "domcert/cli.hpp"
#include "domcert/cones.hpp"
#include "domcert/errors.hpp"
#include "domcert/feasibility.hpp"
#include "domcert/rates.hpp"
#include "domcert/simulate.hpp"
#include "domcert/system.hpp"

namespace py = pybind11;
using namespace domcert;

namespace {

using Edge = std::tuple<std::string, int, std::string>;

Edge edge(const Transition& t) { return {t.from, t.label, t.to}; }

std::map<Edge, double> rates_out(const RateAssignment& r) {
  std::map<Edge, double> out;
  for (const auto& [t, g] : r) out[edge(t)] = g;
  return out;
}

RateAssignment rates_in(const std::map<Edge, double>& r) {
  RateAssignment out;
  for (const auto& [e, g] : r) out[{std::get<0>(e), std::get<1>(e), std::get<2>(e)}] = g;
  return out;
}

py::tuple inertia_tuple(const Inertia& in) { return py::make_tuple(in.neg, in.zero, in.pos); }

SwitchingSignal signal_of(const std::vector<Label>& labels, bool periodic) {
  return {labels, periodic ? SignalKind::periodic : SignalKind::finite};
}

py::dict spectrum_dict(const CycleSpectrum& s) {
  py::dict d;
  d["cycle"] = s.cycle.str();
  py::list edges;
  for (const auto& t : s.cycle.transitions) edges.append(py::cast(edge(t)));
  d["transitions"] = edges;
  d["magnitudes"] = s.magnitudes;
  d["gap"] = py::make_tuple(s.gap_low, s.gap_high);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dominance certificates for constrained switching systems";

  // Translators run newest first, so the base class goes in before the subclasses.
  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NoSolution>(m, "NoSolution", base.ptr());
  py::register_exception<GapError>(m, "GapError", base.ptr());
  py::register_exception<StaleCertificate>(m, "StaleCertificate", base.ptr());
  py::register_exception<StructureError>(m, "StructureError", base.ptr());
  py::register_exception<AdmissibilityError>(m, "AdmissibilityError", base.ptr());
  py::register_exception<DegenerateStart>(m, "DegenerateStart", base.ptr());

  py::class_<SwitchingSystem>(m, "System")
      .def_readonly("n", &SwitchingSystem::n)
      .def_readonly("modes", &SwitchingSystem::modes)
      .def_property_readonly("states", [](const SwitchingSystem& s) { return s.automaton.states(); })
      .def_property_readonly("transitions",
                             [](const SwitchingSystem& s) {
                               std::vector<Edge> out;
                               for (const auto& t : s.automaton.transitions()) out.push_back(edge(t));
                               return out;
                             })
      .def_property_readonly("fingerprint", &system_fingerprint)
      .def("__repr__", [](const SwitchingSystem& s) {
        std::ostringstream o;
        o << "<System n=" << s.n << " modes=" << s.modes.size() << " states=" << s.automaton.state_count() << ">";
        return o.str();
      });

  m.def("load_system", &load_system, py::arg("path"));
  m.def("parse_system", [](const std::string& text) { return parse_system(text); }, py::arg("text"));

  m.def(
      "inertia", [](const Matrix& p) { return inertia_tuple(inertia(SymmetricForm::symmetrized(p))); },
      py::arg("P"), "(negative, zero, positive) eigenvalue counts of a symmetric matrix.");
  m.def(
      "stein_solve", [](const Matrix& a) { return stein_solve(a).matrix(); }, py::arg("A"),
      "P with A^T P A - P = -I.");
  m.def(
      "lmi_residual",
      [](const Matrix& a, const Matrix& from, const Matrix& to, double gamma) {
        const LmiResidual r =
            lmi_residual(a, SymmetricForm::symmetrized(from), SymmetricForm::symmetrized(to), gamma);
        return py::make_tuple(r.residual.matrix(), r.max_eigenvalue);
      },
      py::arg("A"), py::arg("P_from"), py::arg("P_to"), py::arg("gamma"),
      "A^T P_to A - gamma^2 P_from and its largest eigenvalue.");

  m.def(
      "cycle_spectra",
      [](const SwitchingSystem& sys, int p) {
        py::list out;
        for (const auto& s : cycle_spectra(sys, p)) out.append(spectrum_dict(s));
        return out;
      },
      py::arg("system"), py::arg("p"));
  m.def(
      "propose_rates",
      [](const SwitchingSystem& sys, int p) -> py::object {
        const RateProposal r = propose_rates(sys, p);
        if (!r.feasible) return py::none();
        return py::cast(rates_out(r.rates));
      },
      py::arg("system"), py::arg("p"), "Rates keyed by (from, label, to), or None when the gaps are incompatible.");
  m.def(
      "rates_ok",
      [](const SwitchingSystem& sys, int p, const std::map<Edge, double>& rates) {
        return validate_rates(sys, p, rates_in(rates)).ok();
      },
      py::arg("system"), py::arg("p"), py::arg("rates"));

  m.def(
      "analyze",
      [](const SwitchingSystem& sys, int p, std::optional<std::map<Edge, double>> rates, double epsilon,
         std::uint64_t seed, std::size_t max_iters) -> py::object {
        RateAssignment r;
        if (rates) {
          r = rates_in(*rates);
        } else {
          const RateProposal prop = propose_rates(sys, p);
          if (!prop.feasible) return py::none();
          r = prop.rates;
        }
        const LmiProblem prob = assemble(sys, p, r, epsilon);
        const FeasibilityOutcome out = solve(prob, max_iters, seed);
        if (out.status != FeasibilityStatus::feasible) return py::none();
        return py::str(serialize(make_certificate(sys, prob, r, out, seed)));
      },
      py::arg("system"), py::arg("p"), py::arg("rates") = py::none(), py::arg("epsilon") = kDefaultEpsilon,
      py::arg("seed") = 0, py::arg("max_iters") = kDefaultMaxIters,
      "Certificate JSON text, or None when no certificate was found.");
  m.def(
      "validate",
      [](const SwitchingSystem& sys, const std::string& certificate) {
        const ValidationReport r = validate(sys, deserialize(certificate));
        py::dict d;
        d["valid"] = r.valid();
        d["margins_ok"] = r.margins_ok();
        d["inertia_ok"] = r.inertia_ok();
        d["ordering_ok"] = r.ordering_ok();
        d["problems"] = r.problems;
        d["report"] = format_report(r);
        return d;
      },
      py::arg("system"), py::arg("certificate"));

  m.def(
      "simulate",
      [](const SwitchingSystem& sys, const std::vector<Label>& labels, const Vector& x0, std::size_t steps,
         bool periodic) {
        const Trajectory tr = simulate(sys, signal_of(labels, periodic), x0, steps);
        Matrix out(static_cast<Eigen::Index>(tr.states.size()), sys.n);
        for (std::size_t t = 0; t < tr.states.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = tr.states[t];
        return out;
      },
      py::arg("system"), py::arg("labels"), py::arg("x0"), py::arg("steps"), py::arg("periodic") = true,
      "States x(0) .. x(steps) as rows.");
  m.def(
      "decay",
      [](const SwitchingSystem& sys, const std::vector<Label>& block, const Vector& x0, std::size_t steps, int p) {
        const SwitchingSignal sig = signal_of(block, true);
        const DecayEstimate d = decay_estimate(sys, sig, periodic_splitting(sys, sig, p), x0, steps);
        py::dict out;
        out["rho"] = d.rho;
        out["c"] = d.c;
        out["residual"] = d.residual;
        out["bound_holds"] = d.bound_holds;
        out["ratios"] = d.ratios;
        return out;
      },
      py::arg("system"), py::arg("block"), py::arg("x0"), py::arg("steps"), py::arg("p") = 1);
  m.def("projective_distance", &projective_distance, py::arg("x"), py::arg("y"));

  m.def(
      "path_complete",
      [](const std::string& language, const std::string& candidate) -> py::object {
        const PathCompleteness r = path_complete_check(load_automaton(language), load_automaton(candidate));
        if (r.complete) return py::none();
        return py::cast(r.counterexample);
      },
      py::arg("language"), py::arg("candidate"),
      "None when every language word is readable, else the shortest counterexample.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "(exit code, stdout text, stderr text)");
}
