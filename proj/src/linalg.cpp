#include "domcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "domcert/errors.hpp"

namespace domcert {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr int kMaxJacobiSweeps = 100;
constexpr int kMaxQrIterations = 60;

void require_square(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
    throw InvalidInput(os.str());
  }
}

// Diagonal similarity by powers of two so that row and column norms are
// comparable. Exact in floating point, leaves the spectrum unchanged.
void balance(Matrix& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        a.row(i) *= g;
        a.col(i) *= f;
      }
    }
  }
}

// Householder reduction to upper Hessenberg form (similarity transform).
void to_hessenberg(Matrix& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    Vector x = a.block(k + 1, k, n - k - 1, 1);
    const double alpha = x.norm();
    if (alpha == 0.0) continue;
    Vector v = x;
    v(0) += (x(0) >= 0.0 ? alpha : -alpha);
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // A <- H A H with H = I - 2 v v^T acting on rows/cols k+1..n-1.
    auto rows = a.bottomRows(n - k - 1);
    rows -= 2.0 * v * (v.transpose() * rows);
    auto cols = a.rightCols(n - k - 1);
    cols -= 2.0 * (cols * v) * v.transpose();
    a.block(k + 2, k, n - k - 2, 1).setZero();
  }
}

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
// iteration with deflation (the classic EISPACK hqr scheme).
std::vector<std::complex<double>> hessenberg_qr(Matrix a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> wr(n, 0.0);
  std::vector<double> wi(n, 0.0);

  double anorm = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  }

  int nn = n - 1;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -z;
            wi[nn] = z;
          }
          nn -= 2;
        } else {
          if (its == kMaxQrIterations) {
            throw NumericalError("eigenvalues: QR iteration did not converge");
          }
          if (its == 10 || its == 20) {
            // Exceptional shift to break stagnation.
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                            std::abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }

  std::vector<std::complex<double>> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

SymmetricForm::SymmetricForm(Matrix m) {
  require_square(m, "symmetric form");
  require_finite(m, "symmetric form");
  const double asym = (m - m.transpose()).norm();
  if (asym > kSymmetryTol * (1.0 + m.norm())) {
    std::ostringstream os;
    os << "symmetric form: matrix is not symmetric (|P - P^T|_F = " << asym << ")";
    throw InvalidInput(os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymmetricForm SymmetricForm::symmetrized(const Matrix& m) {
  require_square(m, "symmetric form");
  require_finite(m, "symmetric form");
  SymmetricForm out;
  out.m_ = 0.5 * (m + m.transpose());
  return out;
}

double SymmetricForm::quadratic(const Vector& x) const {
  if (x.size() != m_.rows()) throw InvalidInput("quadratic form: dimension mismatch");
  return x.dot(m_ * x);
}

SymmetricForm SymmetricForm::scaled(double c) const {
  SymmetricForm out;
  out.m_ = c * m_;
  return out;
}

std::string Inertia::str() const {
  std::ostringstream os;
  os << "(" << neg << "," << zero << "," << pos << ")";
  return os.str();
}

std::string CircleSplit::str() const {
  std::ostringstream os;
  os << "(" << outside << "," << on << "," << inside << ")";
  return os.str();
}

SymEigen sym_eigen(const SymmetricForm& p) {
  Matrix a = p.matrix();
  const Eigen::Index n = a.rows();
  require_finite(a, "sym_eigen");
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off == 0.0 || std::sqrt(off) <= 1e-17 * scale) break;

    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double aij = a(i, j);
        if (aij == 0.0) continue;
        const double theta = (a(j, j) - a(i, i)) / (2.0 * aij);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the rotation in the (i, j) plane.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double aki = a(k, i);
          const double akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double aik = a(i, k);
          const double ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        a(i, j) = 0.0;
        a(j, i) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vki = v(k, i);
          const double vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  SymEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

double max_eigenvalue(const SymmetricForm& p) {
  const SymEigen e = sym_eigen(p);
  return e.values(e.values.size() - 1);
}

double default_zero_tol(const SymmetricForm& p) { return 1e-9 * std::max(1.0, p.frobenius()); }

Inertia inertia(const SymmetricForm& p, std::optional<double> zero_tol) {
  const double tol = zero_tol.value_or(default_zero_tol(p));
  if (tol < 0.0) throw InvalidInput("inertia: zero tolerance must be nonnegative");
  const SymEigen e = sym_eigen(p);
  Inertia in;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const double lam = e.values(i);
    if (lam < -tol) {
      ++in.neg;
    } else if (lam > tol) {
      ++in.pos;
    } else {
      ++in.zero;
    }
  }
  return in;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
  require_square(a, "eigenvalues");
  require_finite(a, "eigenvalues");
  if (a.rows() == 1) return {std::complex<double>(a(0, 0), 0.0)};
  Matrix h = a;
  balance(h);
  to_hessenberg(h);
  return hessenberg_qr(std::move(h));
}

std::vector<double> spectrum_magnitudes(const Matrix& a) {
  const auto lams = eigenvalues(a);
  std::vector<double> mags;
  mags.reserve(lams.size());
  for (const auto& lam : lams) mags.push_back(std::abs(lam));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags;
}

CircleSplit circle_split(const Matrix& a, double tol) {
  CircleSplit split;
  for (double mag : spectrum_magnitudes(a)) {
    if (mag > 1.0 + tol) {
      ++split.outside;
    } else if (mag < 1.0 - tol) {
      ++split.inside;
    } else {
      ++split.on;
    }
  }
  return split;
}

SymmetricForm stein_solve(const Matrix& a) {
  require_square(a, "stein_solve");
  require_finite(a, "stein_solve");
  const CircleSplit split = circle_split(a);
  if (split.on != 0) {
    throw NoSolution("stein_solve: matrix has " + std::to_string(split.on) +
                     " eigenvalue(s) on the unit circle");
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index n2 = n * n;
  // Column-major vec: vec(A^T P A) = (A^T kron A^T) vec(P).
  Matrix k(n2, n2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) = a(j, i) * a.transpose();
    }
  }
  k -= Matrix::Identity(n2, n2);
  Vector rhs = -Eigen::Map<const Vector>(Matrix::Identity(n, n).eval().data(), n2);

  Eigen::FullPivLU<Matrix> lu(k);
  Vector sol;
  if (lu.rank() == n2) {
    sol = lu.solve(rhs);
  } else {
    // Some lambda_i lambda_j = 1: take the minimum-norm solution if the
    // system is consistent at all.
    sol = k.completeOrthogonalDecomposition().solve(rhs);
    if ((k * sol - rhs).norm() > 1e-9 * (1.0 + sol.norm()) * std::max(1.0, k.norm())) {
      throw NoSolution("stein_solve: eigenvalue pair with product 1 makes the equation inconsistent");
    }
  }
  const Matrix pm = Eigen::Map<const Matrix>(sol.data(), n, n);
  SymmetricForm p = SymmetricForm::symmetrized(pm);

  const double resid =
      (a.transpose() * p.matrix() * a - p.matrix() + Matrix::Identity(n, n)).norm();
  if (!std::isfinite(resid) || resid > 1e-8 * (1.0 + p.frobenius())) {
    std::ostringstream os;
    os << "stein_solve: residual " << resid << " exceeds tolerance";
    throw NumericalError(os.str());
  }
  return p;
}

}  // namespace domcert
