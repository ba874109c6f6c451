#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "domcert/automata.hpp"
#include "domcert/linalg.hpp"
#include "domcert/system.hpp"

namespace domcert {

using RateAssignment = std::map<Transition, double>;

struct CycleSpectrum {
  Cycle cycle;
  Matrix product;                  // A_{sigma_k} ... A_{sigma_1} for the cycle d_1 .. d_k
  std::vector<double> magnitudes;  // descending
  double gap_low = 0.0;            // |lambda_{p+1}|
  double gap_high = 0.0;           // |lambda_p|

  bool gap_empty() const;
};

// Ordered product along a path; later transitions multiply on the left.
Matrix path_product(const SwitchingSystem& sys, const std::vector<Transition>& path);

// Throws InvalidInput unless 1 <= p <= n - 1.
void require_degree(const SwitchingSystem& sys, int p);

std::vector<CycleSpectrum> cycle_spectra(const SwitchingSystem& sys, int p,
                                         std::size_t max_cycles = kDefaultCycleBudget);

struct CycleRateCheck {
  CycleSpectrum spectrum;
  double rate_product = 0.0;
  bool inside = false;       // strictly inside (gap_low, gap_high)
  CircleSplit scaled_split;  // of product / rate_product
  bool split_ok = false;     // scaled_split == (p, 0, n - p)

  bool ok() const { return inside && split_ok; }
};

struct RateReport {
  std::vector<CycleRateCheck> cycles;
  bool ok() const;
};

// Checks every elementary cycle of the automaton. Throws InvalidInput for a
// transition of the trimmed automaton without a rate or for a rate naming an
// unknown transition, InvalidRate for a non-positive rate.
RateReport validate_rates(const SwitchingSystem& sys, int p, const RateAssignment& rates,
                          std::size_t max_cycles = kDefaultCycleBudget);

struct RateProposal {
  bool feasible = false;
  RateAssignment rates;  // filled when feasible
  double log_slack = 0.0;  // Chebyshev radius in log space
  std::vector<CycleSpectrum> spectra;
  std::vector<std::size_t> binding;  // indices into spectra when infeasible
  std::string diagnosis;
};

// Chebyshev center of the log-space cycle constraints
//   ln|lambda_{p+1}(c)| < sum_{d in c} ln gamma_d < ln|lambda_p(c)|.
// Transitions on no cycle get gamma = 1. Throws StructureError if some state
// is neither on a loop nor between loops.
RateProposal propose_rates(const SwitchingSystem& sys, int p,
                           std::size_t max_cycles = kDefaultCycleBudget);

// Rate file: {"rates": [{"from", "label", "to", "gamma"}, ...]} or the bare
// array; gamma may be a number or a fraction string.
RateAssignment parse_rates(std::string_view text);
RateAssignment load_rates(const std::string& path);

}  // namespace domcert
