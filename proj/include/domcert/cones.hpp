#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "domcert/automata.hpp"
#include "domcert/linalg.hpp"

namespace domcert {

// Where x sits relative to the quadratic cone K(P) = {x : x^T P x <= 0}.
enum class ConeRegion { interior, boundary, exterior };

const char* to_string(ConeRegion r);

ConeRegion cone_membership(const SymmetricForm& p, const Vector& x);

// R = A^T P_to A - gamma^2 P_from. The transition contracts K(P_from) into
// K(P_to) with margin eps iff max_eigenvalue <= -eps.
struct LmiResidual {
  std::optional<Transition> transition;
  SymmetricForm residual;
  double max_eigenvalue = 0.0;
  Vector top_eigenvector;

  bool contracts(double eps) const { return max_eigenvalue <= -eps; }
};

LmiResidual lmi_residual(const Matrix& a, const SymmetricForm& from, const SymmetricForm& to,
                         double gamma);

enum class ContractionVerdict { consistent, violation, degenerate_cone };

const char* to_string(ContractionVerdict v);

struct ContractionCheck {
  ContractionVerdict verdict = ContractionVerdict::consistent;
  std::optional<Vector> witness;  // unit vector in K(P_from) with A x outside int K(P_to)
  std::size_t samples_checked = 0;
};

// Sampling test of A (K(P_from) \ {0}) subset int K(P_to). Half of the samples
// are exact boundary points built from the eigenbasis of P_from, the rest are
// drawn by rejection from the cone. Reproducible from `seed`.
ContractionCheck geometric_contraction_check(const Matrix& a, const SymmetricForm& from,
                                             const SymmetricForm& to, std::size_t samples,
                                             std::uint64_t seed);

}  // namespace domcert
