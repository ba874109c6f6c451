#pragma once

#include "domcert/linalg.hpp"

namespace domcert {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = 0.0;
};

// minimize c^T x  subject to  A x <= b,  x >= 0  (b of any sign).
// Dense two-phase tableau simplex with Bland's rule; meant for the small
// programs of rate selection, not for large sparse problems.
LpResult solve_lp(const Matrix& a, const Vector& b, const Vector& c);

}  // namespace domcert
