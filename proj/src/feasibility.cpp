#include "domcert/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "domcert/cones.hpp"
#include "domcert/errors.hpp"

namespace domcert {

namespace {

// Constraints are tightened by this relative amount so that a point accepted
// by the solver survives re-verification at the nominal margin.
constexpr double kMarginTighten = 1e-6;
constexpr double kJitter = 1e-6;

double spectral_norm(const Matrix& a) {
  const double top = max_eigenvalue(SymmetricForm::symmetrized(a.transpose() * a));
  return std::sqrt(std::max(top, 0.0));
}

std::map<State, SymmetricForm> unpack(const LmiProblem& prob, const Vector& x) {
  std::map<State, SymmetricForm> forms;
  const auto k = static_cast<Eigen::Index>(prob.block_size());
  for (std::size_t q = 0; q < prob.states.size(); ++q) {
    forms.emplace(prob.states[q],
                  SymmetricForm::symmetrized(smat(x.segment(static_cast<Eigen::Index>(q) * k, k), prob.n)));
  }
  return forms;
}

}  // namespace

const char* to_string(FeasibilityStatus s) {
  return s == FeasibilityStatus::feasible ? "feasible" : "not-found";
}

Vector svec(const Matrix& m) {
  const Eigen::Index n = m.rows();
  Vector v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      v(k++) = i == j ? m(i, i) : std::numbers::sqrt2 * 0.5 * (m(i, j) + m(j, i));
    }
  }
  return v;
}

Matrix smat(const Vector& v, int n) {
  if (v.size() != n * (n + 1) / 2) throw InvalidInput("smat: wrong vector length");
  Matrix m(n, n);
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double x = v(k++);
      if (i == j) {
        m(i, i) = x;
      } else {
        m(i, j) = m(j, i) = x / std::numbers::sqrt2;
      }
    }
  }
  return m;
}

LmiProblem assemble(const SwitchingSystem& sys, int p, const RateAssignment& rates,
                    double epsilon, double radius) {
  require_degree(sys, p);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("radius must be positive");
  const Automaton core = trim_core(sys.automaton);
  LmiProblem prob;
  prob.n = sys.n;
  prob.p = p;
  prob.epsilon = epsilon;
  prob.radius = radius;
  prob.states = core.states();
  for (std::size_t t = 0; t < core.transitions().size(); ++t) {
    const Transition& d = core.transitions()[t];
    const auto it = rates.find(d);
    if (it == rates.end()) throw InvalidInput("missing rate for transition " + d.str());
    if (!(it->second > 0.0) || !std::isfinite(it->second)) {
      throw InvalidRate("rate for " + d.str() + " must be positive and finite");
    }
    prob.constraints.push_back({d, sys.mode(d.label), it->second, core.from_index(t), core.to_index(t)});
  }
  return prob;
}

std::vector<double> residual_maxima(const LmiProblem& problem,
                                    const std::map<State, SymmetricForm>& forms) {
  std::vector<double> out;
  for (const auto& c : problem.constraints) {
    const auto& from = forms.at(problem.states[c.from]);
    const auto& to = forms.at(problem.states[c.to]);
    out.push_back(lmi_residual(c.a, from, to, c.gamma).max_eigenvalue);
  }
  return out;
}

FeasibilityOutcome solve(const LmiProblem& prob, std::size_t max_iters, std::uint64_t seed) {
  if (prob.n < 2 || prob.states.empty() || prob.constraints.empty()) {
    throw InvalidInput("solve: empty or one-dimensional problem");
  }
  if (!(prob.epsilon > 0.0) || !(prob.radius > 0.0)) {
    throw InvalidInput("solve: epsilon and radius must be positive");
  }
  const auto k = static_cast<Eigen::Index>(prob.block_size());
  const auto m = static_cast<Eigen::Index>(prob.variable_count());
  const double md = static_cast<double>(m);
  const double eps_eff = prob.epsilon * (1.0 + kMarginTighten);

  // Warm start: Stein solution of the first self-loop at each state.
  Vector x = Vector::Zero(m);
  for (std::size_t q = 0; q < prob.states.size(); ++q) {
    for (const auto& c : prob.constraints) {
      if (c.from != q || c.to != q) continue;
      try {
        Vector block = svec(stein_solve(c.a / c.gamma).matrix());
        if (block.norm() > 0.5 * prob.radius) block *= 0.5 * prob.radius / block.norm();
        x.segment(static_cast<Eigen::Index>(q) * k, k) = block;
      } catch (const Error&) {
        // no usable warm start; stays at zero
      }
      break;
    }
  }
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x(i) += kJitter * prob.radius * (2.0 * u - 1.0);
  }

  const double r0 = prob.radius * std::sqrt(static_cast<double>(prob.states.size())) + x.norm();
  Matrix e = Matrix::Identity(m, m) * (r0 * r0);
  double logdet = 2.0 * md * std::log(r0);

  double lipschitz = 0.0;
  for (const auto& c : prob.constraints) {
    const double s = spectral_norm(c.a);
    lipschitz = std::max(lipschitz, s * s + c.gamma * c.gamma);
  }
  const double log_r_min = std::log(prob.epsilon / lipschitz);

  FeasibilityOutcome out;
  for (std::size_t it = 0; it < max_iters; ++it) {
    out.iterations = it + 1;
    if (!x.allFinite() || !e.allFinite()) throw NumericalError("ellipsoid iterate is not finite");

    Vector a = Vector::Zero(m);
    double h = 0.0;
    bool cut = false;
    for (std::size_t q = 0; q < prob.states.size() && !cut; ++q) {
      const auto off = static_cast<Eigen::Index>(q) * k;
      const double norm = x.segment(off, k).norm();
      if (norm > prob.radius) {
        a.segment(off, k) = x.segment(off, k) / norm;
        h = norm - prob.radius;
        cut = true;
      }
    }

    if (!cut) {
      const auto forms = unpack(prob, x);
      std::size_t worst = 0;
      double worst_value = -std::numeric_limits<double>::infinity();
      Vector worst_v;
      for (std::size_t d = 0; d < prob.constraints.size(); ++d) {
        const auto& c = prob.constraints[d];
        const LmiResidual r =
            lmi_residual(c.a, forms.at(prob.states[c.from]), forms.at(prob.states[c.to]), c.gamma);
        const double g = r.max_eigenvalue + eps_eff;
        if (g > worst_value) {
          worst_value = g;
          worst = d;
          worst_v = r.top_eigenvector;
        }
      }
      out.most_violated = prob.constraints[worst].transition;
      out.most_violated_value = worst_value;
      if (worst_value <= 0.0) {
        const auto maxima = residual_maxima(prob, forms);
        const double top = *std::max_element(maxima.begin(), maxima.end());
        if (top <= -prob.epsilon) {
          out.status = FeasibilityStatus::feasible;
          out.forms = forms;
          out.achieved_margin = -top;
          out.log_volume = 0.5 * logdet;
          out.reason = "all constraints satisfied";
          return out;
        }
        worst_value = top + eps_eff;
      }
      const auto& c = prob.constraints[worst];
      const Vector av = c.a * worst_v;
      a.segment(static_cast<Eigen::Index>(c.to) * k, k) += svec(av * av.transpose());
      a.segment(static_cast<Eigen::Index>(c.from) * k, k) -=
          c.gamma * c.gamma * svec(worst_v * worst_v.transpose());
      h = worst_value;
    }

    const Vector ea = e * a;
    const double aea = a.dot(ea);
    if (!(aea > 0.0)) {
      out.reason = "degenerate cut";
      break;
    }
    const double root = std::sqrt(aea);
    const double alpha = h / root;
    if (alpha >= 1.0) {
      out.reason = "cut excludes the whole ellipsoid";
      break;
    }
    const double tau = (1.0 + md * alpha) / (md + 1.0);
    const double sigma = 2.0 * (1.0 + md * alpha) / ((md + 1.0) * (1.0 + alpha));
    const double delta = md * md * (1.0 - alpha * alpha) / (md * md - 1.0);
    x -= (tau / root) * ea;
    e = delta * (e - (sigma / aea) * ea * ea.transpose());
    e = 0.5 * (e + e.transpose());
    logdet += md * std::log(delta) + std::log1p(-sigma);

    if (0.5 * logdet < md * log_r_min) {
      out.reason = "ellipsoid volume below the resolution threshold";
      break;
    }
  }
  if (out.reason.empty()) out.reason = "iteration budget exhausted";
  out.status = FeasibilityStatus::not_found;
  out.log_volume = 0.5 * logdet;
  return out;
}

}  // namespace domcert
