#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "domcert/cones.hpp"
#include "domcert/errors.hpp"
#include "domcert/feasibility.hpp"
#include "fixtures.hpp"

using namespace domcert;
using fixtures::m2;

namespace {

const RateAssignment kUnitAlternating{{{"a", 1, "b"}, 1.0}, {{"b", 2, "a"}, 1.0}};

void expect_sound(const LmiProblem& prob, const FeasibilityOutcome& out) {
  ASSERT_EQ(out.status, FeasibilityStatus::feasible) << out.reason;
  double worst = -1e300;
  for (const auto& c : prob.constraints) {
    const auto& from = out.forms.at(prob.states[c.from]);
    const auto& to = out.forms.at(prob.states[c.to]);
    // Independent residual: A^T P_to A - gamma^2 P_from.
    const Matrix r = c.a.transpose() * to.matrix() * c.a - c.gamma * c.gamma * from.matrix();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (r + r.transpose()));
    EXPECT_LE(es.eigenvalues().maxCoeff(), -prob.epsilon) << c.transition.str();
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  EXPECT_NEAR(out.achieved_margin, -worst, 1e-9 * (1 + std::abs(worst)));
  for (const auto& [q, p] : out.forms) EXPECT_LE(p.frobenius(), prob.radius * (1 + 1e-9));
}

}  // namespace

TEST(Assemble, Counts) {
  const LmiProblem bac = assemble(fixtures::bacteria(), 1, fixtures::bacteria_listing_rates());
  EXPECT_EQ(bac.constraints.size(), 5u);
  EXPECT_EQ(bac.variable_count(), 6u);
  const LmiProblem alt = assemble(fixtures::alternating(), 1, kUnitAlternating);
  EXPECT_EQ(alt.constraints.size(), 2u);
  EXPECT_EQ(alt.variable_count(), 6u);
  const LmiProblem rot = assemble(load_system(fixtures::data("rotation.json")), 1, {{{"a", 1, "a"}, 1.0}});
  EXPECT_EQ(rot.constraints.size(), 1u);
  EXPECT_EQ(rot.variable_count(), 3u);
  EXPECT_EQ(rot.block_size(), 3u);
}

TEST(Assemble, RejectsBadParameters) {
  const SwitchingSystem sys = fixtures::alternating();
  EXPECT_THROW(assemble(sys, 1, kUnitAlternating, 0.0), InvalidInput);
  EXPECT_THROW(assemble(sys, 1, kUnitAlternating, 0.1, -1.0), InvalidInput);
  EXPECT_THROW(assemble(sys, 2, kUnitAlternating), InvalidInput);
  EXPECT_THROW(assemble(sys, 1, {{{"a", 1, "b"}, 1.0}}), InvalidInput);
  EXPECT_THROW(assemble(sys, 1, {{{"a", 1, "b"}, 1.0}, {{"b", 2, "a"}, 0.0}}), InvalidRate);
}

TEST(Svec, RoundTripAndInnerProduct) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const Matrix x = fixtures::random_symmetric(rng, n);
    const Matrix y = fixtures::random_symmetric(rng, n);
    EXPECT_EQ(svec(x).size(), n * (n + 1) / 2);
    EXPECT_LE((smat(svec(x), n) - x).norm(), 1e-14);
    EXPECT_NEAR(svec(x).dot(svec(y)), (x * y).trace(), 1e-12);
    EXPECT_NEAR(svec(x).norm(), x.norm(), 1e-12);
  }
  EXPECT_THROW(smat(Vector::Zero(4), 2), InvalidInput);
}

TEST(Solve, KnownAlternatingPointSatisfiesTheProblem) {
  const LmiProblem prob = assemble(fixtures::alternating(), 1, kUnitAlternating, 0.1);
  const auto maxima = residual_maxima(prob, {{"a", fixtures::alt_pa()}, {"b", fixtures::alt_pb()}});
  ASSERT_EQ(maxima.size(), 2u);
  EXPECT_DOUBLE_EQ(maxima[0], -1.0);
  EXPECT_DOUBLE_EQ(maxima[1], -0.125);
}

TEST(Solve, AlternatingFeasible) {
  const LmiProblem prob = assemble(fixtures::alternating(), 1, kUnitAlternating, 0.1);
  const FeasibilityOutcome out = solve(prob);
  expect_sound(prob, out);
  for (const auto& [q, p] : out.forms) EXPECT_EQ(inertia(p), (Inertia{1, 0, 1})) << q;
}

TEST(Solve, BacteriaListingRatesFeasible) {
  const LmiProblem prob = assemble(fixtures::bacteria(), 1, fixtures::bacteria_listing_rates());
  const FeasibilityOutcome out = solve(prob);
  expect_sound(prob, out);
  EXPECT_STREQ(to_string(out.status), "feasible");
  for (const auto& [q, p] : out.forms) {
    EXPECT_EQ(inertia(p, 1e-7 * (1 + p.frobenius())), (Inertia{1, 0, 1})) << q;
  }
}

TEST(Solve, RotationIsNotFound) {
  // trace(A^T P A) = trace(P) for a rotation, so the residual trace is zero
  // and no P gives a negative definite residual.
  const SwitchingSystem sys = load_system(fixtures::data("rotation.json"));
  const LmiProblem prob = assemble(sys, 1, {{{"a", 1, "a"}, 1.0}}, 0.01);
  const FeasibilityOutcome out = solve(prob, 20000, 0);
  EXPECT_EQ(out.status, FeasibilityStatus::not_found);
  EXPECT_STREQ(to_string(out.status), "not-found");
  EXPECT_FALSE(out.reason.empty());
  ASSERT_TRUE(out.most_violated.has_value());
  EXPECT_EQ(out.most_violated->label, 1);
  EXPECT_THROW(stein_solve(sys.mode(1)), NoSolution);
}

TEST(Solve, ScaledRotationsAreNotFound) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> angle(0.1, 3.0), scale(0.3, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double c = scale(rng);
    // gamma = c cancels the scaling, leaving a rotation.
    const SwitchingSystem sys = fixtures::single_mode(c * fixtures::rotation(angle(rng)));
    const LmiProblem prob = assemble(sys, 1, {{{"a", 1, "a"}, c}}, 0.01);
    EXPECT_EQ(solve(prob, 20000, static_cast<std::uint64_t>(trial)).status, FeasibilityStatus::not_found);
  }
}

TEST(Solve, DeterministicForFixedSeed) {
  const LmiProblem prob = assemble(fixtures::bacteria(), 1, fixtures::bacteria_listing_rates());
  const FeasibilityOutcome a = solve(prob, kDefaultMaxIters, 7);
  const FeasibilityOutcome b = solve(prob, kDefaultMaxIters, 7);
  ASSERT_EQ(a.status, FeasibilityStatus::feasible);
  EXPECT_EQ(a.iterations, b.iterations);
  for (const auto& [q, p] : a.forms) EXPECT_EQ(p.matrix(), b.forms.at(q).matrix());
}

TEST(Solve, BudgetOfOneIterationReportsNotFound) {
  const LmiProblem prob = assemble(fixtures::alternating(), 1, kUnitAlternating, 5.0);
  const FeasibilityOutcome out = solve(prob, 1, 0);
  if (out.status == FeasibilityStatus::not_found) {
    EXPECT_EQ(out.iterations, 1u);
  } else {
    expect_sound(prob, out);
  }
}

TEST(Solve, SoundOnRandomHyperbolicModes) {
  // Diagonal-dominant modes with one expanding and one contracting direction
  // admit a common form; every reported point must pass re-verification.
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> big(2.0, 4.0), small(0.1, 0.4), tiny(-0.1, 0.1);
  int found = 0;
  for (int trial = 0; trial < 15; ++trial) {
    SwitchingSystem sys;
    sys.n = 2;
    for (int k = 0; k < 2; ++k) sys.modes.push_back(m2(big(rng), tiny(rng), tiny(rng), small(rng)));
    sys.automaton = Automaton({"a", "b"}, 2, {{"a", 1, "b"}, {"b", 2, "a"}, {"a", 2, "a"}});
    const RateAssignment rates{{{"a", 1, "b"}, 1.0}, {{"b", 2, "a"}, 1.0}, {{"a", 2, "a"}, 1.0}};
    const LmiProblem prob = assemble(sys, 1, rates, 0.01);
    const FeasibilityOutcome out = solve(prob, 50000, static_cast<std::uint64_t>(trial));
    if (out.status == FeasibilityStatus::feasible) {
      ++found;
      expect_sound(prob, out);
    }
  }
  EXPECT_GE(found, 12);
}

TEST(Solve, ScalingModesAndRatesTogetherPreservesFeasibility) {
  const SwitchingSystem base = fixtures::alternating();
  for (double c : {0.5, 2.0, 10.0}) {
    SwitchingSystem sys = base;
    for (auto& m : sys.modes) m *= c;
    const RateAssignment rates{{{"a", 1, "b"}, c}, {{"b", 2, "a"}, c}};
    // Residuals scale by c^2, so the margin does too.
    const LmiProblem prob = assemble(sys, 1, rates, 0.1 * c * c);
    expect_sound(prob, solve(prob));
  }
}
