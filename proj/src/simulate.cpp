#include "domcert/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "domcert/errors.hpp"
#include "domcert/rates.hpp"

namespace domcert {

namespace {

constexpr double kDegenerateStart = 1e-12;
constexpr double kSnapToZero = 1e-14;
constexpr std::size_t kMaxSubspaceIters = 100000;

Matrix thin_q(const Matrix& z) {
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(z.rows(), z.cols());
}

// Dominant k-dimensional invariant subspace of m by orthogonal iteration
// from a fixed pseudo-random start.
Matrix dominant_subspace(const Matrix& m, Eigen::Index k) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  Matrix q(m.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      q(i, j) = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    }
  }
  q = thin_q(q);
  for (std::size_t it = 0; it < kMaxSubspaceIters; ++it) {
    const Matrix z = m * q;
    const double nz = z.norm();
    if (nz == 0.0) break;
    const Matrix next = thin_q(z);
    const double drift = (z - q * (q.transpose() * z)).norm() / nz;
    q = next;
    if (drift < 1e-14) break;
  }
  return q;
}

Matrix orthogonal_complement(const Matrix& basis) {
  const Eigen::Index n = basis.rows();
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix full = qr.householderQ();
  return full.rightCols(n - basis.cols());
}

// Relative size of the part of `image` outside span(target).
double leakage(const Matrix& image, const Matrix& target) {
  const double ni = image.norm();
  if (ni == 0.0) return 0.0;
  return (image - target * (target.transpose() * image)).norm() / ni;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vector oblique(const FiberSplitting& s, std::size_t t, const Vector& x, bool want_h) {
  const std::size_t phase = t % s.period_length();
  const Matrix& h = s.h[phase];
  const Matrix& v = s.v[phase];
  if (x.size() != h.rows()) throw InvalidInput("projection: dimension mismatch");
  Matrix basis(h.rows(), h.rows());
  basis << h, v;
  const Vector coords = basis.fullPivLu().solve(x);
  return want_h ? Vector(h * coords.head(h.cols())) : Vector(v * coords.tail(v.cols()));
}

}  // namespace

Vector Trajectory::normalized(std::size_t t) const {
  const Vector& x = states.at(t);
  const double n = x.norm();
  return n > 0.0 ? Vector(x / n) : x;
}

Trajectory simulate(const SwitchingSystem& sys, const SwitchingSignal& signal, const Vector& x0,
                    std::size_t steps) {
  if (x0.size() != sys.n) {
    throw InvalidInput("initial state has dimension " + std::to_string(x0.size()) + ", expected " +
                       std::to_string(sys.n));
  }
  if (!x0.allFinite()) throw InvalidInput("initial state is not finite");
  const Automaton core = trim_core(sys.automaton);
  require_admissible(core, signal);
  if (signal.kind == SignalKind::finite && signal.labels.size() < steps) {
    throw InvalidInput("finite signal holds " + std::to_string(signal.labels.size()) +
                       " labels, fewer than the " + std::to_string(steps) + " requested steps");
  }
  std::vector<Label> word(steps);
  for (std::size_t t = 0; t < steps; ++t) word[t] = signal.at(t);

  Trajectory out;
  out.signal = signal;
  out.witness = witness_path(core, word);
  out.states.reserve(steps + 1);
  out.states.push_back(x0);
  for (std::size_t t = 0; t < steps; ++t) out.states.push_back(sys.mode(word[t]) * out.states.back());
  return out;
}

Vector FiberSplitting::project_h(std::size_t t, const Vector& x) const {
  return oblique(*this, t, x, true);
}

Vector FiberSplitting::project_v(std::size_t t, const Vector& x) const {
  return oblique(*this, t, x, false);
}

FiberSplitting periodic_splitting(const SwitchingSystem& sys, const SwitchingSignal& signal, int p) {
  if (signal.kind != SignalKind::periodic) {
    throw InvalidInput("fiber splitting needs a periodic signal");
  }
  require_degree(sys, p);
  require_admissible(trim_core(sys.automaton), signal);

  FiberSplitting s;
  s.p = p;
  s.period = signal.labels;
  const std::size_t period = s.period.size();

  auto phase_monodromy = [&](std::size_t t) {
    Matrix m = Matrix::Identity(sys.n, sys.n);
    for (std::size_t k = 0; k < period; ++k) m = sys.mode(s.period[(t + k) % period]) * m;
    return m;
  };

  s.monodromy = phase_monodromy(0);
  s.monodromy_magnitudes = spectrum_magnitudes(s.monodromy);
  const double top = s.monodromy_magnitudes[static_cast<std::size_t>(p - 1)];
  const double next = s.monodromy_magnitudes[static_cast<std::size_t>(p)];
  if (!(top > next * (1.0 + 1e-9)) || top <= 0.0) {
    std::ostringstream os;
    os << "no spectral gap at p = " << p << ": |lambda_" << p << "| = " << top << ", |lambda_"
       << p + 1 << "| = " << next;
    throw GapError(os.str());
  }

  for (std::size_t t = 0; t < period; ++t) {
    const Matrix m = phase_monodromy(t);
    s.h.push_back(dominant_subspace(m, p));
    s.v.push_back(orthogonal_complement(dominant_subspace(m.transpose(), p)));
  }
  for (std::size_t t = 0; t < period; ++t) {
    const Matrix& a = sys.mode(s.period[t]);
    const std::size_t nt = (t + 1) % period;
    s.invariance_residual = std::max(s.invariance_residual, leakage(a * s.h[t], s.h[nt]));
    s.invariance_residual = std::max(s.invariance_residual, leakage(a * s.v[t], s.v[nt]));
  }
  return s;
}

DecayEstimate decay_estimate(const SwitchingSystem& sys, const SwitchingSignal& signal,
                             const FiberSplitting& splitting, const Vector& x0, std::size_t steps) {
  if (signal.kind != SignalKind::periodic || signal.labels != splitting.period) {
    throw InvalidInput("decay estimate: signal does not match the splitting's period");
  }
  if (x0.size() != sys.n) throw InvalidInput("decay estimate: dimension mismatch");
  const double scale = x0.norm();
  Vector h = splitting.project_h(0, x0);
  Vector v = splitting.project_v(0, x0);
  if (!(h.norm() > kDegenerateStart * scale)) {
    throw DegenerateStart("initial state has no component along the dominant fiber H(0)");
  }
  if (v.norm() <= kSnapToZero * scale) v.setZero();

  DecayEstimate out;
  out.ratios.reserve(steps + 1);
  out.ratios.push_back(v.norm() / h.norm());
  for (std::size_t t = 0; t < steps; ++t) {
    const Matrix& a = sys.mode(signal.at(t));
    h = splitting.project_h(t + 1, a * h);
    v = splitting.project_v(t + 1, a * v);
    const double s = std::max(h.norm(), v.norm());
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("decay estimate: fiber components vanished");
    h /= s;
    v /= s;
    out.ratios.push_back(v.norm() / h.norm());
  }

  out.burn_in = steps / 10;
  const std::size_t period = splitting.period_length();
  std::vector<std::size_t> ts;
  for (std::size_t t = out.burn_in; t <= steps; ++t) {
    if (out.ratios[t] > 0.0) ts.push_back(t);
  }
  out.fitted_points = ts.size();
  const double r0 = out.ratios[0];
  if (ts.empty() || r0 == 0.0) {
    out.rho = 0.0;
    out.c = 1.0;
    out.residual = 0.0;
    out.bound_holds = std::all_of(out.ratios.begin() + 1, out.ratios.end(),
                                  [](double r) { return r == 0.0; });
    return out;
  }

  // Phase offsets only when every phase has more samples than needed.
  std::vector<int> phase_col(period, -1);
  int cols = 0;
  const bool per_phase = ts.size() > period + 1;
  for (std::size_t t : ts) {
    const std::size_t ph = per_phase ? t % period : 0;
    if (phase_col[ph] < 0) phase_col[ph] = cols++;
  }
  if (ts.size() < static_cast<std::size_t>(cols) + 1) {
    throw InvalidInput("decay estimate: too few nonzero ratios to fit a rate");
  }
  Matrix design = Matrix::Zero(static_cast<Eigen::Index>(ts.size()), cols + 1);
  Vector rhs(static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const std::size_t ph = per_phase ? ts[i] % period : 0;
    design(row, phase_col[ph]) = 1.0;
    design(row, cols) = static_cast<double>(ts[i]);
    rhs(row) = std::log(out.ratios[ts[i]]);
  }
  const Vector coef = design.colPivHouseholderQr().solve(rhs);
  const double log_rho = coef(cols);
  out.rho = std::exp(log_rho);
  out.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(ts.size()));

  double log_c = 0.0;
  for (std::size_t t : ts) {
    log_c = std::max(log_c, std::log(out.ratios[t]) - std::log(r0) - static_cast<double>(t) * log_rho);
  }
  out.c = std::exp(log_c);
  out.bound_holds = true;
  for (std::size_t t = 0; t <= steps; ++t) {
    const double r = out.ratios[t];
    if (r == 0.0) continue;
    if (std::log(r) > log_c + std::log(r0) + static_cast<double>(t) * log_rho + 1e-9) {
      out.bound_holds = false;
      break;
    }
  }
  return out;
}

double projective_distance(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw InvalidInput("projective_distance: dimension mismatch");
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) throw InvalidInput("projective_distance: zero vector");
  const Vector a = x / nx;
  const Vector b = y / ny;
  return std::min((a - b).norm(), (a + b).norm());
}

std::vector<Label> parse_label_list(std::string_view text) {
  std::vector<Label> labels;
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || v < 1) throw ParseError("bad label '" + token + "' in signal");
    labels.push_back(v);
    token.clear();
  };
  bool comment = false;
  for (char ch : text) {
    if (comment) {
      if (ch == '\n') comment = false;
      continue;
    }
    if (ch == '#') {
      flush();
      comment = true;
    } else if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  if (labels.empty()) throw ParseError("signal holds no labels");
  return labels;
}

SwitchingSignal parse_signal_spec(std::string_view spec) {
  constexpr std::string_view periodic = "periodic:";
  constexpr std::string_view file = "file:";
  SwitchingSignal s;
  if (spec.starts_with(periodic)) {
    s.kind = SignalKind::periodic;
    s.labels = parse_label_list(spec.substr(periodic.size()));
  } else if (spec.starts_with(file)) {
    const std::string path(spec.substr(file.size()));
    s.kind = SignalKind::finite;
    try {
      s.labels = parse_label_list(read_text_file(path));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
  } else {
    throw ParseError("signal spec must be 'periodic:<labels>' or 'file:<path>'");
  }
  return s;
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<double>* ratios) {
  std::ostringstream os;
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
  os << ",norm,ratio\n";
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const Vector& x = traj.states[t];
    os << t;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << g17(x(i));
    os << ',' << g17(x.norm()) << ',';
    if (ratios && t < ratios->size()) os << g17((*ratios)[t]);
    os << '\n';
  }
  return os.str();
}

}  // namespace domcert
