#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "domcert/automata.hpp"
#include "domcert/linalg.hpp"
#include "domcert/rates.hpp"
#include "domcert/system.hpp"

namespace domcert {

inline constexpr double kDefaultEpsilon = 0.01;
inline constexpr double kDefaultRadius = 1e4;
inline constexpr std::size_t kDefaultMaxIters = 200000;

struct LmiConstraint {
  Transition transition;
  Matrix a;
  double gamma = 1.0;
  std::size_t from = 0;  // index into LmiProblem::states
  std::size_t to = 0;
};

// Find {P_q} with A^T P_to A - gamma^2 P_from <= -eps I on every transition
// and |P_q|_F <= radius.
struct LmiProblem {
  int n = 0;
  int p = 0;
  std::vector<State> states;
  std::vector<LmiConstraint> constraints;
  double epsilon = kDefaultEpsilon;
  double radius = kDefaultRadius;

  std::size_t block_size() const { return static_cast<std::size_t>(n * (n + 1) / 2); }
  std::size_t variable_count() const { return states.size() * block_size(); }
};

// One constraint per transition of the trimmed automaton. Throws InvalidInput
// for missing rates, eps <= 0, radius <= 0 or a degree outside 1..n-1.
LmiProblem assemble(const SwitchingSystem& sys, int p, const RateAssignment& rates,
                    double epsilon = kDefaultEpsilon, double radius = kDefaultRadius);

// Lower-triangle coordinates with off-diagonals scaled by sqrt(2), so that
// <svec X, svec Y> = trace(X Y).
Vector svec(const Matrix& m);
Matrix smat(const Vector& v, int n);

enum class FeasibilityStatus { feasible, not_found };

const char* to_string(FeasibilityStatus s);

struct FeasibilityOutcome {
  FeasibilityStatus status = FeasibilityStatus::not_found;
  std::map<State, SymmetricForm> forms;  // when feasible
  double achieved_margin = 0.0;          // -max_d lambda_max(R_d)
  std::size_t iterations = 0;
  double log_volume = 0.0;  // log of the ellipsoid's semi-axis product at exit
  std::optional<Transition> most_violated;
  double most_violated_value = 0.0;  // lambda_max + eps of that constraint
  std::string reason;
};

// lambda_max of each residual at the given forms, in constraint order.
std::vector<double> residual_maxima(const LmiProblem& problem,
                                    const std::map<State, SymmetricForm>& forms);

// Central-cut-deep ellipsoid method. Never reports infeasibility: a failure
// only means no point was found for these rates, margin, radius and budget.
FeasibilityOutcome solve(const LmiProblem& problem, std::size_t max_iters = kDefaultMaxIters,
                         std::uint64_t seed = 0);

}  // namespace domcert
