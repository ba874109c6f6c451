#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domcert/feasibility.hpp"
#include "domcert/linalg.hpp"
#include "domcert/rates.hpp"
#include "domcert/system.hpp"

namespace domcert {

inline constexpr int kCertificateVersion = 1;

struct CertificateMeta {
  std::optional<std::size_t> iterations;
  std::optional<double> achieved_margin;
  std::optional<std::string> timestamp;  // ISO 8601, UTC
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;
};

struct Certificate {
  int version = kCertificateVersion;
  std::string system_fingerprint;
  int p = 0;
  double epsilon = 0.0;
  RateAssignment rates;
  std::map<State, SymmetricForm> forms;
  CertificateMeta meta;
};

// JSON with fixed key order version, system_fingerprint, p, epsilon, rates,
// P, meta. Matrix entries are row-major strings with 17 significant digits.
std::string serialize(const Certificate& cert);

// Throws ParseError naming the field (or line/column for malformed JSON);
// unknown keys are rejected.
Certificate deserialize(std::string_view text);

Certificate load_certificate(const std::string& path);
void save_certificate(const Certificate& cert, const std::string& path);

// Packs a feasible solver outcome; throws InvalidInput otherwise.
Certificate make_certificate(const SwitchingSystem& sys, const LmiProblem& problem,
                             const RateAssignment& rates, const FeasibilityOutcome& outcome,
                             std::uint64_t seed);

struct TransitionCheck {
  Transition transition;
  std::optional<double> gamma;
  std::optional<double> max_eigenvalue;  // empty when a form or rate is missing
  bool margin_ok = false;
  int nu_from = -1;
  int nu_to = -1;
  bool order_ok = false;  // nu(P_from) <= nu(P_to)
};

struct StateCheck {
  State state;
  std::optional<Inertia> inertia;
  bool ok = false;  // inertia == (p, 0, n - p)
};

struct ValidationReport {
  int p = 0;
  double epsilon = 0.0;
  Inertia expected;
  std::vector<TransitionCheck> transitions;
  std::vector<StateCheck> states;
  bool rates_ok = false;
  std::vector<std::string> problems;  // one line per failed sub-check

  bool margins_ok() const;
  bool inertia_ok() const;
  bool ordering_ok() const;
  bool valid() const;
};

// zero band for the inertia sub-check: 1e-7 * (1 + |P|_F)
double certificate_zero_tol(const SymmetricForm& p);

// Throws StaleCertificate when the fingerprint does not match `sys`.
ValidationReport validate(const SwitchingSystem& sys, const Certificate& cert);

std::string format_report(const ValidationReport& report);

}  // namespace domcert
