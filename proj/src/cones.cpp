#include "domcert/cones.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "domcert/errors.hpp"

namespace domcert {

namespace {

constexpr double kFormTol = 1e-12;
constexpr int kMaxRejections = 256;

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  // Box-Muller; written out so the stream is the same on every toolchain.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = unit();
    } while (u <= 0.0);
    const double v = unit();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * std::numbers::pi * v);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * v);
  }

  Vector combination(const Matrix& basis) {
    Vector c(basis.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal();
    return basis * c;
  }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Matrix columns(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
  return out;
}

}  // namespace

const char* to_string(ConeRegion r) {
  switch (r) {
    case ConeRegion::interior:
      return "interior";
    case ConeRegion::boundary:
      return "boundary";
    case ConeRegion::exterior:
      return "exterior";
  }
  return "?";
}

const char* to_string(ContractionVerdict v) {
  switch (v) {
    case ContractionVerdict::consistent:
      return "consistent";
    case ContractionVerdict::violation:
      return "violation";
    case ContractionVerdict::degenerate_cone:
      return "degenerate-cone";
  }
  return "?";
}

ConeRegion cone_membership(const SymmetricForm& p, const Vector& x) {
  if (x.size() != p.dim()) throw InvalidInput("cone_membership: dimension mismatch");
  const double value = p.quadratic(x);
  const double tol = kFormTol * (1.0 + p.frobenius() * x.squaredNorm());
  if (value < -tol) return ConeRegion::interior;
  if (value > tol) return ConeRegion::exterior;
  return ConeRegion::boundary;
}

LmiResidual lmi_residual(const Matrix& a, const SymmetricForm& from, const SymmetricForm& to,
                         double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidRate("lmi_residual: rate must be positive and finite");
  }
  if (a.rows() != a.cols() || a.rows() != from.dim() || a.rows() != to.dim()) {
    throw InvalidInput("lmi_residual: dimension mismatch");
  }
  require_finite(a, "lmi_residual");
  LmiResidual out;
  out.residual =
      SymmetricForm::symmetrized(a.transpose() * to.matrix() * a - gamma * gamma * from.matrix());
  const SymEigen e = sym_eigen(out.residual);
  const Eigen::Index top = e.values.size() - 1;
  out.max_eigenvalue = e.values(top);
  out.top_eigenvector = e.vectors.col(top);
  return out;
}

ContractionCheck geometric_contraction_check(const Matrix& a, const SymmetricForm& from,
                                             const SymmetricForm& to, std::size_t samples,
                                             std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("geometric_contraction_check: need at least one sample");
  if (a.rows() != a.cols() || a.rows() != from.dim() || a.rows() != to.dim()) {
    throw InvalidInput("geometric_contraction_check: dimension mismatch");
  }

  const SymEigen e = sym_eigen(from);
  const double ztol = default_zero_tol(from);
  std::vector<Eigen::Index> neg, zero, pos;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) < -ztol) {
      neg.push_back(i);
    } else if (e.values(i) > ztol) {
      pos.push_back(i);
    } else {
      zero.push_back(i);
    }
  }

  ContractionCheck out;
  if (neg.empty()) {
    out.verdict = ContractionVerdict::degenerate_cone;
    return out;
  }

  const double target_scale = to.frobenius();
  auto violates = [&](const Vector& x) {
    const Vector y = a * x;
    return !(to.quadratic(y) < -kFormTol * (1.0 + target_scale * y.squaredNorm()));
  };
  auto check = [&](Vector x) {
    const double nx = x.norm();
    if (nx == 0.0) return false;
    x /= nx;
    ++out.samples_checked;
    if (violates(x)) {
      out.verdict = ContractionVerdict::violation;
      out.witness = x;
      return true;
    }
    return false;
  };

  // Deterministic boundary points first: balanced pairs of eigenvectors and
  // the null directions of P_from.
  std::vector<Vector> fixed;
  for (Eigen::Index i : neg) {
    for (Eigen::Index j : pos) {
      const Vector ui = e.vectors.col(i);
      const Vector uj = e.vectors.col(j);
      const double wi = std::sqrt(e.values(j));
      const double wj = std::sqrt(-e.values(i));
      fixed.push_back(wi * ui + wj * uj);
      fixed.push_back(wi * ui - wj * uj);
    }
  }
  for (Eigen::Index k : zero) fixed.push_back(e.vectors.col(k));
  for (const Vector& x : fixed) {
    if (out.samples_checked >= samples) return out;
    if (check(x)) return out;
  }

  const Matrix neg_basis = columns(e.vectors, neg);
  const Matrix pos_basis = columns(e.vectors, pos);
  Gaussian gen(seed);
  const Eigen::Index n = a.rows();

  for (std::size_t k = 0; out.samples_checked < samples; ++k) {
    Vector x;
    const Vector y_neg = gen.combination(neg_basis);
    const double q_neg = from.quadratic(y_neg);
    const Vector y_pos = pos.empty() ? Vector::Zero(n) : gen.combination(pos_basis);
    const double q_pos = pos.empty() ? 0.0 : from.quadratic(y_pos);
    if (k % 2 == 0 && q_pos > 0.0 && q_neg < 0.0) {
      // On the boundary: x^T P x = q_neg q_pos + (-q_neg) q_pos = 0.
      x = std::sqrt(q_pos) * y_neg + std::sqrt(-q_neg) * y_pos;
    } else {
      bool accepted = false;
      for (int tries = 0; tries < kMaxRejections && !accepted; ++tries) {
        Vector z(n);
        for (Eigen::Index i = 0; i < n; ++i) z(i) = gen.normal();
        if (from.quadratic(z) <= 0.0) {
          x = z;
          accepted = true;
        }
      }
      if (!accepted) {
        // Thin cone: interpolate between the negative direction and the boundary.
        const double u = gen.unit();
        x = q_pos > 0.0 ? Vector(y_neg + u * std::sqrt(-q_neg / q_pos) * y_pos) : y_neg;
      }
    }
    if (check(x)) return out;
  }
  return out;
}

}  // namespace domcert
