#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace domcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Throws InvalidInput when any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

// A real symmetric matrix. The checked constructor accepts inputs whose
// asymmetry is within 1e-12 * (1 + |M|_F) and stores (M + M^T) / 2.
class SymmetricForm {
 public:
  SymmetricForm() = default;
  explicit SymmetricForm(Matrix m);

  // Averages with the transpose unconditionally. For matrices built by
  // symmetric formulas whose floating-point asymmetry is not an input error.
  static SymmetricForm symmetrized(const Matrix& m);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  double frobenius() const { return m_.norm(); }
  double quadratic(const Vector& x) const;
  SymmetricForm scaled(double c) const;

 private:
  Matrix m_;
};

struct Inertia {
  int neg = 0;
  int zero = 0;
  int pos = 0;

  int dim() const noexcept { return neg + zero + pos; }
  std::string str() const;
  friend bool operator==(const Inertia&, const Inertia&) = default;
};

// Eigenvalue counts of a square matrix relative to the complex unit circle.
struct CircleSplit {
  int outside = 0;
  int on = 0;
  int inside = 0;

  std::string str() const;
  friend bool operator==(const CircleSplit&, const CircleSplit&) = default;
};

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi rotations.
SymEigen sym_eigen(const SymmetricForm& p);

double max_eigenvalue(const SymmetricForm& p);

double default_zero_tol(const SymmetricForm& p);

Inertia inertia(const SymmetricForm& p, std::optional<double> zero_tol = std::nullopt);

// Full (complex) spectrum of a general square matrix: balancing, Householder
// reduction to Hessenberg form, then Francis double-shift QR.
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

// |lambda_i| in descending order.
std::vector<double> spectrum_magnitudes(const Matrix& a);

CircleSplit circle_split(const Matrix& a, double tol = 1e-9);

// P with A^T P A - P = -I, from the Kronecker-vectorized system; unique
// unless two eigenvalues multiply to 1, in which case the minimum-norm
// solution is returned. Throws NoSolution if A has an eigenvalue on the unit
// circle or the singular system is inconsistent.
SymmetricForm stein_solve(const Matrix& a);

}  // namespace domcert
