#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domcert/automata.hpp"
#include "domcert/linalg.hpp"
#include "domcert/system.hpp"

namespace domcert {

struct Trajectory {
  SwitchingSignal signal;
  std::vector<Vector> states;  // x(0) .. x(T)
  std::vector<State> witness;  // q_0 .. q_T

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  Vector normalized(std::size_t t) const;
};

// Iterates x(t+1) = A_sigma(t) x(t) without rescaling. The signal is checked
// against the trimmed automaton first (AdmissibilityError with position);
// a finite signal must hold at least `steps` labels.
Trajectory simulate(const SwitchingSystem& sys, const SwitchingSignal& signal, const Vector& x0,
                    std::size_t steps);

// Invariant fibers of a periodic signal with block sigma(0..T-1). Phase t uses
// the monodromy A_sigma(t-1) ... A_sigma(0) A_sigma(T-1) ... A_sigma(t):
// H(t) is its dominant p-dimensional invariant subspace, V(t) the orthogonal
// complement of the dominant p-dimensional invariant subspace of its transpose.
struct FiberSplitting {
  int p = 0;
  std::vector<Label> period;
  Matrix monodromy;  // phase 0
  std::vector<double> monodromy_magnitudes;
  std::vector<Matrix> h;  // orthonormal n x p basis per phase
  std::vector<Matrix> v;  // orthonormal n x (n - p) basis per phase
  double invariance_residual = 0.0;

  std::size_t period_length() const { return period.size(); }
  // Oblique projections of x onto H(t) along V(t) and onto V(t) along H(t).
  Vector project_h(std::size_t t, const Vector& x) const;
  Vector project_v(std::size_t t, const Vector& x) const;
};

// Throws GapError unless |lambda_p(M)| > |lambda_{p+1}(M)|, InvalidInput for a
// non-periodic signal or p outside 1..n-1.
FiberSplitting periodic_splitting(const SwitchingSystem& sys, const SwitchingSignal& signal, int p);

struct DecayEstimate {
  std::vector<double> ratios;  // r(0) .. r(T)
  double rho = 0.0;
  double c = 1.0;
  double residual = 0.0;  // RMS of the log-space fit
  std::size_t burn_in = 0;
  std::size_t fitted_points = 0;
  bool bound_holds = false;  // r(t) <= c rho^t r(0) for every t
};

// The H and V components are propagated and re-projected separately so the
// ratio is not floored by rounding in x(t). The fit is least squares on
// ln r(t) = b_{t mod T} + t ln rho over t >= burn_in (the first 10% dropped).
// Throws DegenerateStart when x0 has no H(0) component.
DecayEstimate decay_estimate(const SwitchingSystem& sys, const SwitchingSignal& signal,
                             const FiberSplitting& splitting, const Vector& x0, std::size_t steps);

// min(|x^ - y^|, |x^ + y^|) for the normalized vectors.
double projective_distance(const Vector& x, const Vector& y);

// "periodic:2,1,3" or "file:<path>" (labels separated by commas or blanks,
// '#' comments; yields a finite signal).
SwitchingSignal parse_signal_spec(std::string_view spec);
std::vector<Label> parse_label_list(std::string_view text);

// CSV with header t,x1..xn,norm,ratio and 17 significant digits.
std::string trajectory_csv(const Trajectory& traj, const std::vector<double>* ratios = nullptr);

}  // namespace domcert
