#include "domcert/simplex.hpp"

#include <cmath>
#include <vector>

#include "domcert/errors.hpp"

namespace domcert {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kMaxPivots = 100000;

class Tableau {
 public:
  Tableau(const Matrix& a, const Vector& b) : m_(a.rows()), n_(a.cols()) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (b(i) < 0.0) artificial_rows_.push_back(i);
    }
    n_art_ = static_cast<Eigen::Index>(artificial_rows_.size());
    cols_ = n_ + m_ + n_art_;
    t_ = Matrix::Zero(m_ + 1, cols_ + 1);
    basis_.resize(static_cast<std::size_t>(m_));
    Eigen::Index next_art = 0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = sign;
      t_(i, cols_) = sign * b(i);
      if (b(i) < 0.0) {
        const Eigen::Index col = n_ + m_ + next_art++;
        t_(i, col) = 1.0;
        basis_[static_cast<std::size_t>(i)] = col;
      } else {
        basis_[static_cast<std::size_t>(i)] = n_ + i;
      }
    }
  }

  bool is_artificial(Eigen::Index col) const { return col >= n_ + m_ && col < cols_; }

  // Loads reduced costs for the given column costs under the current basis.
  void set_costs(const Vector& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(cols_) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Returns false if unbounded.
  bool optimize(bool allow_artificial) {
    for (int it = 0; it < kMaxPivots; ++it) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        if (t_(m_, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (t_(i, enter) > kPivotTol) {
          const double ratio = t_(i, cols_) / t_(i, enter);
          if (leave < 0 || ratio < best - 1e-14 ||
              (std::abs(ratio - best) <= 1e-14 &&
               basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
            leave = i;
            best = ratio;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw NumericalError("simplex: pivot limit reached");
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i != row && t_(i, col) != 0.0) t_.row(i) -= t_(i, col) * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Pivots zero-level artificials out of the basis where possible.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      for (Eigen::Index j = 0; j < n_ + m_; ++j) {
        if (std::abs(t_(i, j)) > kPivotTol) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  double objective() const { return -t_(m_, cols_); }
  Eigen::Index columns() const { return cols_; }
  Eigen::Index artificial_count() const { return n_art_; }

  Vector primal() const {
    Vector x = Vector::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      if (col < n_) x(col) = t_(i, cols_);
    }
    return x;
  }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::Index n_art_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Eigen::Index> artificial_rows_;
  std::vector<Eigen::Index> basis_;
  Matrix t_;
};

}  // namespace

LpResult solve_lp(const Matrix& a, const Vector& b, const Vector& c) {
  if (a.rows() != b.size() || a.cols() != c.size()) {
    throw InvalidInput("solve_lp: dimension mismatch");
  }
  require_finite(a, "solve_lp");
  Tableau tab(a, b);
  LpResult out;

  if (tab.artificial_count() > 0) {
    Vector phase1 = Vector::Zero(tab.columns());
    phase1.tail(tab.artificial_count()).setOnes();
    tab.set_costs(phase1);
    tab.optimize(true);
    if (tab.objective() > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) {
      out.status = LpStatus::infeasible;
      return out;
    }
    tab.expel_artificials();
  }

  Vector phase2 = Vector::Zero(tab.columns());
  phase2.head(c.size()) = c;
  tab.set_costs(phase2);
  if (!tab.optimize(false)) {
    out.status = LpStatus::unbounded;
    return out;
  }
  out.status = LpStatus::optimal;
  out.x = tab.primal();
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace domcert
