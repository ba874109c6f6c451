#include "domcert/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "domcert/automata.hpp"
#include "domcert/certificate.hpp"
#include "domcert/errors.hpp"
#include "domcert/feasibility.hpp"
#include "domcert/rates.hpp"
#include "domcert/simulate.hpp"
#include "domcert/system.hpp"

namespace domcert {

namespace {

struct AnalyzeArgs {
  std::string system;
  int p = 0;
  std::string rates = "auto";
  double epsilon = kDefaultEpsilon;
  std::string out = "certificate.json";
  std::optional<std::uint64_t> seed;
  std::size_t max_iters = kDefaultMaxIters;
};

struct CheckArgs {
  std::string system;
  std::string certificate;
};

struct RatesArgs {
  std::string system;
  int p = 0;
  std::string rates;
  std::size_t max_cycles = kDefaultCycleBudget;
};

struct SimulateArgs {
  std::string system;
  std::string signal;
  std::vector<std::string> x0;
  std::optional<std::size_t> steps;
  std::string certificate;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

struct PathArgs {
  std::string language;
  std::string automaton;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("DOMCERT_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || errno == ERANGE || env[0] == '-') {
    throw InvalidInput(std::string("DOMCERT_SEED is not an unsigned integer: '") + env + "'");
  }
  return v;
}

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::string magnitudes_str(const std::vector<double>& m) {
  std::string s = "(";
  for (std::size_t i = 0; i < m.size(); ++i) s += (i ? ", " : "") + num(m[i], 10);
  return s + ")";
}

void print_rates(std::ostream& out, const RateAssignment& rates) {
  for (const auto& [t, gamma] : rates) out << "  " << t.str() << "  gamma=" << num(gamma, 10) << "\n";
}

void print_cycles(std::ostream& out, const std::vector<CycleSpectrum>& spectra, int p) {
  out << "cycles (" << spectra.size() << "), admissible rate-product interval for p=" << p << ":\n";
  for (const auto& s : spectra) {
    out << "  " << s.cycle.str() << "\n    magnitudes " << magnitudes_str(s.magnitudes)
        << "  interval (" << num(s.gap_low, 12) << ", " << num(s.gap_high, 12) << ")"
        << (s.gap_empty() ? "  EMPTY" : "") << "\n";
  }
}

void print_binding(std::ostream& out, const RateProposal& prop) {
  out << "rates: infeasible: " << prop.diagnosis << "\n";
  for (std::size_t k : prop.binding) {
    const auto& s = prop.spectra[k];
    out << "  binding cycle " << s.cycle.str() << "  interval (" << num(s.gap_low, 12) << ", "
        << num(s.gap_high, 12) << ")\n";
  }
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  const SwitchingSystem sys = load_system(a.system);
  const SwitchingSystem core = trimmed(sys);
  require_degree(core, a.p);
  out << "system: n=" << sys.n << ", " << sys.alphabet_size() << " modes, "
      << core.automaton.state_count() << " states and " << core.automaton.transitions().size()
      << " transitions after trimming\n";

  RateAssignment rates;
  if (a.rates == "auto") {
    const RateProposal prop = propose_rates(core, a.p);
    if (!prop.feasible) {
      print_binding(out, prop);
      return kExitNegative;
    }
    rates = prop.rates;
    out << "rates (proposed, log-space slack " << num(prop.log_slack) << "):\n";
  } else {
    rates = load_rates(a.rates);
    const RateReport report = validate_rates(core, a.p, rates);
    if (!report.ok()) {
      out << "rates: supplied rates are not admissible for p=" << a.p << "\n";
      for (const auto& c : report.cycles) {
        if (c.ok()) continue;
        out << "  cycle " << c.spectrum.cycle.str() << "  rate product " << num(c.rate_product, 10)
            << " not in (" << num(c.spectrum.gap_low, 10) << ", " << num(c.spectrum.gap_high, 10)
            << "), scaled split " << c.scaled_split.str() << "\n";
      }
      return kExitNegative;
    }
    out << "rates (from " << a.rates << "):\n";
  }
  print_rates(out, rates);

  const LmiProblem problem = assemble(core, a.p, rates, a.epsilon);
  out << "problem: " << problem.constraints.size() << " constraints, " << problem.variable_count()
      << " variables, epsilon=" << num(a.epsilon) << "\n";
  const FeasibilityOutcome outcome = solve(problem, a.max_iters, seed);
  out << "solver: " << to_string(outcome.status) << " after " << outcome.iterations
      << " iterations (" << outcome.reason << ")\n";
  if (outcome.status != FeasibilityStatus::feasible) {
    if (outcome.most_violated) {
      out << "  most violated: " << outcome.most_violated->str()
          << "  lambda_max + eps = " << num(outcome.most_violated_value) << "\n";
    }
    out << "no certificate found for these rates, margin and budget\n";
    return kExitNegative;
  }

  const Certificate cert = make_certificate(sys, problem, rates, outcome, seed);
  const ValidationReport report = validate(sys, cert);
  out << format_report(report);
  if (!report.valid()) {
    err << "error: solver output failed independent validation\n";
    return kExitNegative;
  }
  save_certificate(cert, a.out);
  out << "certificate written to " << a.out << "\n";
  return kExitOk;
}

int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream&) {
  const SwitchingSystem sys = load_system(a.system);
  const Certificate cert = load_certificate(a.certificate);
  const ValidationReport report = validate(sys, cert);
  out << format_report(report);
  return report.valid() ? kExitOk : kExitInputError;
}

int cmd_rates(const RatesArgs& a, std::ostream& out, std::ostream&) {
  const SwitchingSystem core = trimmed(load_system(a.system));
  const RateProposal prop = propose_rates(core, a.p, a.max_cycles);
  print_cycles(out, prop.spectra, a.p);
  int code = kExitOk;
  if (prop.feasible) {
    out << "proposed rates (log-space slack " << num(prop.log_slack) << "):\n";
    print_rates(out, prop.rates);
  } else {
    print_binding(out, prop);
    code = kExitNegative;
  }
  if (!a.rates.empty()) {
    const RateReport report = validate_rates(core, a.p, load_rates(a.rates), a.max_cycles);
    out << "supplied rates:\n";
    for (const auto& c : report.cycles) {
      out << "  " << c.spectrum.cycle.str() << "  product " << num(c.rate_product, 10) << "  "
          << (c.inside ? "inside" : "OUTSIDE") << "  scaled split " << c.scaled_split.str() << "\n";
    }
    out << "supplied rates: " << (report.ok() ? "ok" : "violated") << "\n";
    if (!report.ok()) code = kExitNegative;
  }
  return code;
}

Vector parse_vector(const std::string& csv, int n) {
  std::vector<double> vals;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) vals.push_back(parse_real_literal(token));
  if (static_cast<int>(vals.size()) != n) {
    throw InvalidInput("--x0 '" + csv + "' has " + std::to_string(vals.size()) + " entries, expected " +
                       std::to_string(n));
  }
  return Eigen::Map<Vector>(vals.data(), n);
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  const SwitchingSystem sys = load_system(a.system);
  const SwitchingSignal signal = parse_signal_spec(a.signal);
  std::size_t steps = a.steps.value_or(60);
  if (signal.kind == SignalKind::finite && !a.steps) steps = signal.labels.size();

  std::vector<Vector> starts;
  for (const auto& s : a.x0) starts.push_back(parse_vector(s, sys.n));
  if (starts.empty()) {
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 3; ++k) {
      Vector x(sys.n);
      for (int i = 0; i < sys.n; ++i) x(i) = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
      starts.push_back(x);
    }
  }

  std::optional<FiberSplitting> splitting;
  if (!a.certificate.empty()) {
    const Certificate cert = load_certificate(a.certificate);
    const ValidationReport report = validate(sys, cert);
    if (!report.valid()) err << "warning: certificate does not validate against this system\n";
    if (signal.kind == SignalKind::periodic) {
      try {
        splitting = periodic_splitting(sys, signal, cert.p);
        out << "splitting: p=" << cert.p << ", monodromy magnitudes "
            << magnitudes_str(splitting->monodromy_magnitudes) << ", invariance residual "
            << num(splitting->invariance_residual, 3) << "\n";
      } catch (const GapError& e) {
        out << "splitting: " << e.what() << "\n";
        return kExitNegative;
      }
    } else {
      out << "splitting: signal is not periodic; reporting trajectory convergence only\n";
    }
  }

  std::filesystem::create_directories(a.out_dir);
  std::vector<Trajectory> trajs;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    Trajectory traj = simulate(sys, signal, starts[k], steps);
    std::optional<DecayEstimate> decay;
    if (splitting) {
      try {
        decay = decay_estimate(sys, signal, *splitting, starts[k], steps);
      } catch (const DegenerateStart& e) {
        out << "trajectory " << k << ": " << e.what() << "\n";
      }
    }
    const std::filesystem::path file =
        std::filesystem::path(a.out_dir) / ("trajectory_" + std::to_string(k) + ".csv");
    std::ofstream csv(file, std::ios::binary);
    if (!csv) throw InvalidInput("cannot write '" + file.string() + "'");
    csv << trajectory_csv(traj, decay ? &decay->ratios : nullptr);
    out << "trajectory " << k << ": " << steps << " steps -> " << file.string();
    if (decay) {
      out << "  rho=" << num(decay->rho) << " C=" << num(decay->c)
          << " fit_residual=" << num(decay->residual, 3)
          << " bound=" << (decay->bound_holds ? "holds" : "fails");
    }
    out << "\n";
    trajs.push_back(std::move(traj));
  }

  if (trajs.size() > 1 && steps > 0) {
    double worst = 0.0;
    bool zero = false;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      for (std::size_t j = i + 1; j < trajs.size(); ++j) {
        const Vector& x = trajs[i].states.back();
        const Vector& y = trajs[j].states.back();
        if (x.norm() == 0.0 || y.norm() == 0.0) {
          zero = true;
          continue;
        }
        worst = std::max(worst, projective_distance(x, y));
      }
    }
    out << "max pairwise distance of normalized final states: " << num(worst, 3)
        << (zero ? " (zero states skipped)" : "") << "\n";
  }
  return kExitOk;
}

int cmd_pathcomplete(const PathArgs& a, std::ostream& out, std::ostream&) {
  const Automaton language = trim_core(load_automaton(a.language));
  const Automaton candidate = trim_core(load_automaton(a.automaton));
  const PathCompleteness res = path_complete_check(language, candidate);
  if (res.complete) {
    out << "complete\n";
    return kExitOk;
  }
  out << "counterexample:";
  for (Label l : res.counterexample) out << ' ' << l;
  out << "\n";
  return kExitNegative;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path-complete p-dominance certificates for constrained switching systems", "domcert"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "domcert 0.1.0");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "search for a dominance certificate");
  analyze->add_option("--system", an.system, "system description file")->required();
  analyze->add_option("--p", an.p, "dominance degree")->required();
  analyze->add_option("--rates", an.rates, "'auto' or a rate file")->capture_default_str();
  analyze->add_option("--epsilon", an.epsilon, "LMI margin")->capture_default_str();
  analyze->add_option("--out", an.out, "certificate output path")->capture_default_str();
  analyze->add_option("--seed", an.seed, "solver seed (default: DOMCERT_SEED or 0)");
  analyze->add_option("--max-iters", an.max_iters, "ellipsoid iteration budget")->capture_default_str();

  CheckArgs ck;
  auto* check = app.add_subcommand("check", "validate a certificate against a system");
  check->add_option("--system", ck.system, "system description file")->required();
  check->add_option("--certificate", ck.certificate, "certificate file")->required();

  RatesArgs rt;
  auto* rates = app.add_subcommand("rates", "cycle spectra, rate intervals and proposed rates");
  rates->add_option("--system", rt.system, "system description file")->required();
  rates->add_option("--p", rt.p, "dominance degree")->required();
  rates->add_option("--rates", rt.rates, "also validate this rate file");
  rates->add_option("--max-cycles", rt.max_cycles, "cycle enumeration budget")->capture_default_str();

  SimulateArgs sm;
  auto* sim = app.add_subcommand("simulate", "simulate trajectories and write CSV files");
  sim->add_option("--system", sm.system, "system description file")->required();
  sim->add_option("--signal", sm.signal, "periodic:<labels> or file:<path>")->required();
  sim->add_option("--x0", sm.x0, "initial state as comma-separated values (repeatable)");
  sim->add_option("--steps", sm.steps, "number of steps (default 60)");
  sim->add_option("--certificate", sm.certificate, "certificate giving p for the decay estimate");
  sim->add_option("--out-dir", sm.out_dir, "directory for trajectory CSV files")->capture_default_str();
  sim->add_option("--seed", sm.seed, "seed for random initial states");

  PathArgs pc;
  auto* path = app.add_subcommand("pathcomplete", "check path-completeness of an automaton");
  path->add_option("--language", pc.language, "automaton presenting the language")->required();
  path->add_option("--automaton", pc.automaton, "candidate automaton")->required();

  std::vector<std::string> argv_store{"domcert"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*analyze) return cmd_analyze(an, out, err);
    if (*check) return cmd_check(ck, out, err);
    if (*rates) return cmd_rates(rt, out, err);
    if (*sim) return cmd_simulate(sm, out, err);
    if (*path) return cmd_pathcomplete(pc, out, err);
  } catch (const GapError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNegative;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << " (cap " << e.cap() << ")\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace domcert
