#include "domcert/rates.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "domcert/errors.hpp"
#include "domcert/simplex.hpp"

namespace domcert {

using nlohmann::json;

namespace {

constexpr double kStrictSlack = 1e-9;
// When |lambda_{p+1}| vanishes the lower log bound is -inf; we cap the
// admissible window at six decades below |lambda_p|.
constexpr double kLogFloorSpan = 13.815510557964274;  // ln(1e6)

struct LogWindow {
  double lo;
  double hi;
};

LogWindow log_window(const CycleSpectrum& s) {
  const double hi = std::log(s.gap_high);
  const double lo = s.gap_low > 0.0 ? std::log(s.gap_low) : hi - kLogFloorSpan;
  return {std::max(lo, hi - kLogFloorSpan), hi};
}

double product_of_rates(const RateAssignment& rates, const Cycle& c) {
  double prod = 1.0;
  for (const auto& t : c.transitions) prod *= rates.at(t);
  return prod;
}

}  // namespace

bool CycleSpectrum::gap_empty() const {
  return !(gap_high > gap_low * (1.0 + kStrictSlack)) || gap_high <= 0.0;
}

bool RateReport::ok() const {
  return std::all_of(cycles.begin(), cycles.end(), [](const CycleRateCheck& c) { return c.ok(); });
}

Matrix path_product(const SwitchingSystem& sys, const std::vector<Transition>& path) {
  Matrix m = Matrix::Identity(sys.n, sys.n);
  for (const auto& t : path) m = sys.mode(t.label) * m;
  return m;
}

void require_degree(const SwitchingSystem& sys, int p) {
  if (p < 1 || p > sys.n - 1) {
    throw InvalidInput("degree p must lie in 1.." + std::to_string(sys.n - 1) + " (got " +
                       std::to_string(p) + ")");
  }
}

std::vector<CycleSpectrum> cycle_spectra(const SwitchingSystem& sys, int p,
                                         std::size_t max_cycles) {
  require_degree(sys, p);
  std::vector<CycleSpectrum> out;
  for (auto& c : enumerate_cycles(sys.automaton, max_cycles)) {
    CycleSpectrum s;
    s.product = path_product(sys, c.transitions);
    s.magnitudes = spectrum_magnitudes(s.product);
    s.gap_high = s.magnitudes[static_cast<std::size_t>(p - 1)];
    s.gap_low = s.magnitudes[static_cast<std::size_t>(p)];
    s.cycle = std::move(c);
    out.push_back(std::move(s));
  }
  return out;
}

RateReport validate_rates(const SwitchingSystem& sys, int p, const RateAssignment& rates,
                          std::size_t max_cycles) {
  require_degree(sys, p);
  for (const auto& [t, gamma] : rates) {
    if (!sys.automaton.has_transition(t)) {
      throw InvalidInput("rate given for unknown transition " + t.str());
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw InvalidRate("rate for " + t.str() + " must be positive and finite");
    }
  }
  const Automaton core = trim_core(sys.automaton);
  for (const auto& t : core.transitions()) {
    if (!rates.contains(t)) throw InvalidInput("missing rate for transition " + t.str());
  }

  const CircleSplit wanted{p, 0, sys.n - p};
  RateReport report;
  for (auto& s : cycle_spectra(sys, p, max_cycles)) {
    CycleRateCheck c;
    c.rate_product = product_of_rates(rates, s.cycle);
    c.inside = c.rate_product > s.gap_low * (1.0 + kStrictSlack) &&
               c.rate_product < s.gap_high * (1.0 - kStrictSlack);
    c.scaled_split = circle_split(s.product / c.rate_product);
    c.split_ok = c.scaled_split == wanted;
    c.spectrum = std::move(s);
    report.cycles.push_back(std::move(c));
  }
  return report;
}

RateProposal propose_rates(const SwitchingSystem& sys, int p, std::size_t max_cycles) {
  require_degree(sys, p);
  const auto outside = states_outside_loops(sys.automaton);
  if (!outside.empty()) {
    std::string names;
    for (const auto& q : outside) names += (names.empty() ? "" : ", ") + q;
    throw StructureError("states neither on a loop nor between loops: " + names);
  }

  RateProposal out;
  out.spectra = cycle_spectra(sys, p, max_cycles);
  for (std::size_t k = 0; k < out.spectra.size(); ++k) {
    if (out.spectra[k].gap_empty()) out.binding.push_back(k);
  }
  if (!out.binding.empty()) {
    out.diagnosis = "empty rate gap: |lambda_" + std::to_string(p) + "| = |lambda_" +
                    std::to_string(p + 1) + "| on " + std::to_string(out.binding.size()) +
                    " cycle(s)";
    return out;
  }

  const auto& edges = sys.automaton.transitions();
  const std::size_t ne = edges.size();
  const std::size_t nc = out.spectra.size();
  auto edge_index = [&](const Transition& t) {
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), t) - edges.begin());
  };

  // Incidence, windows and a neutral starting point spreading each cycle's
  // mid-window log product evenly over its edges.
  Matrix inc = Matrix::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(ne));
  std::vector<LogWindow> win;
  Vector base = Vector::Zero(static_cast<Eigen::Index>(ne));
  Vector hits = Vector::Zero(static_cast<Eigen::Index>(ne));
  for (std::size_t c = 0; c < nc; ++c) {
    const LogWindow w = log_window(out.spectra[c]);
    win.push_back(w);
    const auto& ts = out.spectra[c].cycle.transitions;
    const double share = 0.5 * (w.lo + w.hi) / static_cast<double>(ts.size());
    for (const auto& t : ts) {
      const auto d = static_cast<Eigen::Index>(edge_index(t));
      inc(static_cast<Eigen::Index>(c), d) += 1.0;
      base(d) += share;
      hits(d) += 1.0;
    }
  }
  for (Eigen::Index d = 0; d < base.size(); ++d) {
    if (hits(d) > 0.0) base(d) /= hits(d);
  }

  // Variables: e+ (ne), e- (ne), t+, t-. g = base + e+ - e-, slack t = t+ - t-.
  const auto vars = static_cast<Eigen::Index>(2 * ne + 2);
  const auto nev = static_cast<Eigen::Index>(ne);
  const auto rows = static_cast<Eigen::Index>(2 * nc);
  Matrix a = Matrix::Zero(rows + 1, vars);
  Vector b = Vector::Zero(rows + 1);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto r = static_cast<Eigen::Index>(2 * c);
    const Vector row = inc.row(static_cast<Eigen::Index>(c)).transpose();
    const double norm = row.norm();
    const double at_base = row.dot(base);
    // lower: a.g - |a| t >= lo
    a.block(r, 0, 1, nev) = -row.transpose();
    a.block(r, nev, 1, nev) = row.transpose();
    a(r, 2 * nev) = norm;
    a(r, 2 * nev + 1) = -norm;
    b(r) = at_base - win[c].lo;
    // upper: a.g + |a| t <= hi
    a.block(r + 1, 0, 1, nev) = row.transpose();
    a.block(r + 1, nev, 1, nev) = -row.transpose();
    a(r + 1, 2 * nev) = norm;
    a(r + 1, 2 * nev + 1) = -norm;
    b(r + 1) = win[c].hi - at_base;
  }

  Vector cost = Vector::Zero(vars);
  cost(2 * nev) = -1.0;
  cost(2 * nev + 1) = 1.0;
  const LpResult stage1 = solve_lp(a.topRows(rows), b.head(rows), cost);
  if (stage1.status != LpStatus::optimal) {
    throw NumericalError("rate selection: slack maximization did not converge");
  }
  const double best = -stage1.objective;

  auto slack_of = [&](const Vector& x, std::size_t c) {
    const Vector g = base + x.head(nev) - x.segment(nev, nev);
    const Vector row = inc.row(static_cast<Eigen::Index>(c)).transpose();
    const double v = row.dot(g);
    return std::min(v - win[c].lo, win[c].hi - v) / row.norm();
  };

  if (best <= kStrictSlack) {
    for (std::size_t c = 0; c < nc; ++c) {
      if (slack_of(stage1.x, c) <= best + 1e-9) out.binding.push_back(c);
    }
    out.log_slack = best;
    out.diagnosis = "cycle constraints are inconsistent: no rates strictly inside every gap";
    return out;
  }

  // Stage 2: among the maximal-slack points, the one closest (l1) to base.
  a.row(rows).setZero();
  a(rows, 2 * nev) = -1.0;
  a(rows, 2 * nev + 1) = 1.0;
  b(rows) = -(best - 1e-9 * std::max(1.0, std::abs(best)));
  Vector cost2 = Vector::Zero(vars);
  cost2.head(2 * nev).setOnes();
  const LpResult stage2 = solve_lp(a, b, cost2);
  const Vector& x = stage2.status == LpStatus::optimal ? stage2.x : stage1.x;

  const Vector g = base + x.head(nev) - x.segment(nev, nev);
  out.log_slack = best;
  for (std::size_t c = 0; c < nc; ++c) out.log_slack = std::min(out.log_slack, slack_of(x, c));
  for (std::size_t d = 0; d < ne; ++d) {
    out.rates[edges[d]] = std::exp(g(static_cast<Eigen::Index>(d)));
  }
  if (!validate_rates(sys, p, out.rates, max_cycles).ok()) {
    out.feasible = false;
    out.rates.clear();
    out.diagnosis = "proposed rates failed re-validation";
    return out;
  }
  out.feasible = true;
  return out;
}

RateAssignment parse_rates(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("rates: malformed JSON: ") + e.what());
  }
  if (root.is_object()) {
    for (const auto& item : root.items()) {
      if (item.key() != "rates") throw ParseError("rates: unknown field '" + item.key() + "'");
    }
    if (!root.contains("rates")) throw ParseError("rates: missing 'rates'");
    root = root["rates"];
  }
  if (!root.is_array()) throw ParseError("rates: expected an array");
  RateAssignment out;
  for (std::size_t k = 0; k < root.size(); ++k) {
    const json& r = root[k];
    const std::string f = "rates[" + std::to_string(k) + "]";
    if (!r.is_object()) throw ParseError(f + ": expected an object");
    for (const auto& item : r.items()) {
      const auto& key = item.key();
      if (key != "from" && key != "label" && key != "to" && key != "gamma") {
        throw ParseError(f + ": unknown field '" + key + "'");
      }
    }
    if (!r.contains("from") || !r["from"].is_string() || !r.contains("to") ||
        !r["to"].is_string() || !r.contains("label") || !r["label"].is_number_integer() ||
        !r.contains("gamma")) {
      throw ParseError(f + ": expected from, label, to, gamma");
    }
    double gamma = 0.0;
    if (r["gamma"].is_number()) {
      gamma = r["gamma"].get<double>();
    } else if (r["gamma"].is_string()) {
      gamma = parse_real_literal(r["gamma"].get<std::string>());
    } else {
      throw ParseError(f + ".gamma: expected a number or a fraction string");
    }
    Transition t{r["from"].get<std::string>(), r["label"].get<int>(), r["to"].get<std::string>()};
    if (out.contains(t)) throw ParseError(f + ": duplicate rate for " + t.str());
    out[t] = gamma;
  }
  return out;
}

RateAssignment load_rates(const std::string& path) {
  try {
    return parse_rates(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace domcert
