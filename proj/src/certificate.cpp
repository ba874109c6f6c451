#include "domcert/certificate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "domcert/cones.hpp"
#include "domcert/errors.hpp"

namespace domcert {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double number_field(const json& j, const std::string& field) {
  if (j.is_number()) {
    const double v = j.get<double>();
    if (std::isfinite(v)) return v;
  } else if (j.is_string()) {
    try {
      return parse_real_literal(j.get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError(field + ": " + e.what());
    }
  }
  throw ParseError(field + ": expected a finite number");
}

void only_keys(const json& j, std::initializer_list<std::string_view> allowed,
               const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ParseError(where + ": unknown field '" + item.key() + "'");
    }
  }
}

const json& required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j[key];
}

}  // namespace

std::string serialize(const Certificate& cert) {
  ordered_json root;
  root["version"] = cert.version;
  root["system_fingerprint"] = cert.system_fingerprint;
  root["p"] = cert.p;
  root["epsilon"] = cert.epsilon;
  ordered_json rates = ordered_json::array();
  for (const auto& [t, gamma] : cert.rates) {
    ordered_json r;
    r["from"] = t.from;
    r["label"] = t.label;
    r["to"] = t.to;
    r["gamma"] = gamma;
    rates.push_back(r);
  }
  root["rates"] = rates;
  ordered_json forms = ordered_json::object();
  for (const auto& [q, form] : cert.forms) {
    ordered_json entries = ordered_json::array();
    const Matrix& m = form.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) entries.push_back(exact(m(i, k)));
    }
    forms[q] = entries;
  }
  root["P"] = forms;
  ordered_json meta = ordered_json::object();
  if (cert.meta.iterations) meta["iterations"] = *cert.meta.iterations;
  if (cert.meta.achieved_margin) meta["achieved_margin"] = *cert.meta.achieved_margin;
  if (cert.meta.timestamp) meta["timestamp"] = *cert.meta.timestamp;
  if (cert.meta.seed) meta["seed"] = *cert.meta.seed;
  if (cert.meta.solver) meta["solver"] = *cert.meta.solver;
  root["meta"] = meta;
  return root.dump(2) + "\n";
}

Certificate deserialize(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("certificate: malformed JSON: ") + e.what());
  }
  const std::string where = "certificate";
  if (!root.is_object()) throw ParseError(where + ": expected a JSON object");
  only_keys(root, {"version", "system_fingerprint", "p", "epsilon", "rates", "P", "meta"}, where);

  Certificate cert;
  const json& version = required(root, "version", where);
  if (!version.is_number_integer()) throw ParseError(where + ".version: expected an integer");
  cert.version = version.get<int>();
  if (cert.version != kCertificateVersion) {
    throw ParseError(where + ".version: unsupported version " + std::to_string(cert.version));
  }
  const json& fp = required(root, "system_fingerprint", where);
  if (!fp.is_string()) throw ParseError(where + ".system_fingerprint: expected a hex string");
  cert.system_fingerprint = fp.get<std::string>();
  const json& p = required(root, "p", where);
  if (!p.is_number_integer()) throw ParseError(where + ".p: expected an integer");
  cert.p = p.get<int>();
  cert.epsilon = number_field(required(root, "epsilon", where), where + ".epsilon");
  if (!(cert.epsilon > 0.0)) throw ParseError(where + ".epsilon: must be positive");

  const json& rates = required(root, "rates", where);
  if (!rates.is_array()) throw ParseError(where + ".rates: expected an array");
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const json& r = rates[k];
    const std::string f = where + ".rates[" + std::to_string(k) + "]";
    if (!r.is_object()) throw ParseError(f + ": expected an object");
    only_keys(r, {"from", "label", "to", "gamma"}, f);
    const json& from = required(r, "from", f);
    const json& label = required(r, "label", f);
    const json& to = required(r, "to", f);
    if (!from.is_string() || !to.is_string() || !label.is_number_integer()) {
      throw ParseError(f + ": expected string from/to and integer label");
    }
    Transition t{from.get<std::string>(), label.get<int>(), to.get<std::string>()};
    if (cert.rates.contains(t)) throw ParseError(f + ": duplicate transition " + t.str());
    cert.rates[t] = number_field(required(r, "gamma", f), f + ".gamma");
  }

  const json& forms = required(root, "P", where);
  if (!forms.is_object()) throw ParseError(where + ".P: expected an object of state -> entries");
  for (const auto& item : forms.items()) {
    const std::string f = where + ".P." + item.key();
    const json& entries = item.value();
    if (!entries.is_array() || entries.empty()) throw ParseError(f + ": expected n*n entries");
    const auto count = static_cast<Eigen::Index>(entries.size());
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(count))));
    if (n * n != count) throw ParseError(f + ": entry count is not a square");
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < count; ++i) {
      m(i / n, i % n) = number_field(entries[static_cast<std::size_t>(i)],
                                     f + "[" + std::to_string(i) + "]");
    }
    try {
      cert.forms.emplace(item.key(), SymmetricForm(m));
    } catch (const InvalidInput& e) {
      throw ParseError(f + ": " + e.what());
    }
  }

  if (root.contains("meta")) {
    const json& meta = root["meta"];
    const std::string f = where + ".meta";
    if (!meta.is_object()) throw ParseError(f + ": expected an object");
    only_keys(meta, {"iterations", "achieved_margin", "timestamp", "seed", "solver"}, f);
    if (meta.contains("iterations")) {
      if (!meta["iterations"].is_number_unsigned()) throw ParseError(f + ".iterations: expected a count");
      cert.meta.iterations = meta["iterations"].get<std::size_t>();
    }
    if (meta.contains("achieved_margin")) {
      cert.meta.achieved_margin = number_field(meta["achieved_margin"], f + ".achieved_margin");
    }
    if (meta.contains("timestamp")) {
      if (!meta["timestamp"].is_string()) throw ParseError(f + ".timestamp: expected a string");
      cert.meta.timestamp = meta["timestamp"].get<std::string>();
    }
    if (meta.contains("seed")) {
      if (!meta["seed"].is_number_unsigned()) throw ParseError(f + ".seed: expected an unsigned integer");
      cert.meta.seed = meta["seed"].get<std::uint64_t>();
    }
    if (meta.contains("solver")) {
      if (!meta["solver"].is_string()) throw ParseError(f + ".solver: expected a string");
      cert.meta.solver = meta["solver"].get<std::string>();
    }
  }
  return cert;
}

Certificate load_certificate(const std::string& path) {
  try {
    return deserialize(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_certificate(const Certificate& cert, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << serialize(cert);
  if (!out) throw InvalidInput("failed writing '" + path + "'");
}

Certificate make_certificate(const SwitchingSystem& sys, const LmiProblem& problem,
                             const RateAssignment& rates, const FeasibilityOutcome& outcome,
                             std::uint64_t seed) {
  if (outcome.status != FeasibilityStatus::feasible) {
    throw InvalidInput("make_certificate: outcome is not feasible");
  }
  Certificate cert;
  cert.system_fingerprint = system_fingerprint(sys);
  cert.p = problem.p;
  cert.epsilon = problem.epsilon;
  for (const auto& c : problem.constraints) cert.rates[c.transition] = rates.at(c.transition);
  cert.forms = outcome.forms;
  cert.meta.iterations = outcome.iterations;
  cert.meta.achieved_margin = outcome.achieved_margin;
  cert.meta.timestamp = utc_now();
  cert.meta.seed = seed;
  cert.meta.solver = "ellipsoid";
  return cert;
}

bool ValidationReport::margins_ok() const {
  return std::all_of(transitions.begin(), transitions.end(),
                     [](const TransitionCheck& t) { return t.margin_ok; });
}

bool ValidationReport::inertia_ok() const {
  return std::all_of(states.begin(), states.end(), [](const StateCheck& s) { return s.ok; });
}

bool ValidationReport::ordering_ok() const {
  return std::all_of(transitions.begin(), transitions.end(),
                     [](const TransitionCheck& t) { return t.order_ok; });
}

bool ValidationReport::valid() const {
  return margins_ok() && inertia_ok() && ordering_ok() && rates_ok && problems.empty();
}

double certificate_zero_tol(const SymmetricForm& p) { return 1e-7 * (1.0 + p.frobenius()); }

ValidationReport validate(const SwitchingSystem& sys, const Certificate& cert) {
  if (cert.system_fingerprint != system_fingerprint(sys)) {
    throw StaleCertificate("certificate was issued for a different system (fingerprint " +
                           cert.system_fingerprint.substr(0, 12) + "...)");
  }
  ValidationReport report;
  report.p = cert.p;
  report.epsilon = cert.epsilon;
  if (cert.p < 1 || cert.p > sys.n - 1) {
    report.problems.push_back("degree p = " + std::to_string(cert.p) + " outside 1.." +
                              std::to_string(sys.n - 1));
  }
  if (!(cert.epsilon > 0.0)) report.problems.push_back("epsilon must be positive");

  const Automaton core = trim_core(sys.automaton);
  const Inertia wanted{cert.p, 0, sys.n - cert.p};
  report.expected = wanted;
  std::map<State, int> nu;
  for (const auto& [q, form] : cert.forms) {
    if (!core.has_state(q)) report.problems.push_back("form for unknown state '" + q + "'");
  }
  for (const auto& q : core.states()) {
    StateCheck s;
    s.state = q;
    const auto it = cert.forms.find(q);
    if (it == cert.forms.end()) {
      report.problems.push_back("no form for state '" + q + "'");
    } else if (it->second.dim() != sys.n) {
      report.problems.push_back("form for state '" + q + "' is not " + std::to_string(sys.n) + "x" +
                                std::to_string(sys.n));
    } else {
      s.inertia = inertia(it->second, certificate_zero_tol(it->second));
      s.ok = *s.inertia == wanted;
      nu[q] = s.inertia->neg;
      if (!s.ok) {
        report.problems.push_back("state '" + q + "': inertia " + s.inertia->str() + ", expected " +
                                  wanted.str());
      }
    }
    report.states.push_back(std::move(s));
  }

  report.rates_ok = true;
  for (const auto& [t, gamma] : cert.rates) {
    if (!core.has_transition(t)) {
      report.rates_ok = false;
      report.problems.push_back("rate for transition outside the trimmed automaton: " + t.str());
    } else if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      report.rates_ok = false;
      report.problems.push_back("non-positive rate on " + t.str());
    }
  }

  for (const auto& t : core.transitions()) {
    TransitionCheck c;
    c.transition = t;
    const auto rate = cert.rates.find(t);
    if (rate == cert.rates.end()) {
      report.rates_ok = false;
      report.problems.push_back("missing rate for " + t.str());
    } else {
      c.gamma = rate->second;
    }
    if (nu.contains(t.from) && nu.contains(t.to)) {
      c.nu_from = nu[t.from];
      c.nu_to = nu[t.to];
      c.order_ok = c.nu_from <= c.nu_to;
      if (!c.order_ok) {
        report.problems.push_back(t.str() + ": inertia ordering violated (" +
                                  std::to_string(c.nu_from) + " > " + std::to_string(c.nu_to) + ")");
      }
    }
    const bool forms_ok = nu.contains(t.from) && nu.contains(t.to);
    if (forms_ok && c.gamma && *c.gamma > 0.0 && std::isfinite(*c.gamma)) {
      c.max_eigenvalue = lmi_residual(sys.mode(t.label), cert.forms.at(t.from), cert.forms.at(t.to),
                                      *c.gamma)
                             .max_eigenvalue;
      c.margin_ok = *c.max_eigenvalue <= -cert.epsilon;
      if (!c.margin_ok) {
        std::ostringstream os;
        os << t.str() << ": residual max eigenvalue " << *c.max_eigenvalue << " > -" << cert.epsilon;
        report.problems.push_back(os.str());
      }
    }
    report.transitions.push_back(std::move(c));
  }
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << "transitions (residual lambda_max, margin >= " << report.epsilon << "):\n";
  for (const auto& t : report.transitions) {
    os << "  " << t.transition.str() << "  gamma=";
    if (t.gamma) {
      os << *t.gamma;
    } else {
      os << "?";
    }
    os << "  lambda_max=";
    if (t.max_eigenvalue) {
      os << *t.max_eigenvalue;
    } else {
      os << "?";
    }
    os << "  nu " << t.nu_from << " -> " << t.nu_to << "  " << (t.margin_ok && t.order_ok ? "ok" : "FAIL")
       << "\n";
  }
  os << "states (inertia, expected " << report.expected.str() << "):\n";
  for (const auto& s : report.states) {
    os << "  " << s.state << "  " << (s.inertia ? s.inertia->str() : std::string("?")) << "  "
       << (s.ok ? "ok" : "FAIL") << "\n";
  }
  for (const auto& p : report.problems) os << "problem: " << p << "\n";
  os << "verdict: " << (report.valid() ? "valid" : "invalid") << "\n";
  return os.str();
}

}  // namespace domcert
