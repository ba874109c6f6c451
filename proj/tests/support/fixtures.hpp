#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "domcert/certificate.hpp"
#include "domcert/rates.hpp"
#include "domcert/system.hpp"

namespace fixtures {

using domcert::Matrix;
using domcert::Vector;

inline std::string data(const std::string& name) { return std::string(DOMCERT_DATA_DIR) + "/" + name; }

inline Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Matrix rotation(double theta) {
  return m2(std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta));
}

// Diagonal modes diag(2,4), diag(1,1/8) under strict alternation a -1-> b -2-> a.
inline domcert::SwitchingSystem alternating() { return domcert::load_system(data("alternating_diagonal.json")); }

// Two bacterial types, three modes, mode 3 only after mode 1 or 3.
inline domcert::SwitchingSystem bacteria() { return domcert::load_system(data("bacteria.json")); }

inline domcert::RateAssignment bacteria_listing_rates() {
  return {{{"a", 2, "a"}, 0.75},
          {{"a", 1, "b"}, 0.25},
          {{"b", 2, "a"}, 0.25},
          {{"b", 1, "b"}, 0.75},
          {{"b", 3, "b"}, 0.75}};
}

inline domcert::SymmetricForm alt_pa() { return domcert::SymmetricForm(m2(-1, 0, 0, 8)); }
inline domcert::SymmetricForm alt_pb() { return domcert::SymmetricForm(m2(-0.5, 0, 0, 0.25)); }

// The hand-made certificate for the alternating system: gamma = 1, eps = 0.1.
inline domcert::Certificate alternating_certificate(const domcert::SwitchingSystem& sys) {
  domcert::Certificate c;
  c.system_fingerprint = domcert::system_fingerprint(sys);
  c.p = 1;
  c.epsilon = 0.1;
  c.rates = {{{"a", 1, "b"}, 1.0}, {{"b", 2, "a"}, 1.0}};
  c.forms = {{"a", alt_pa()}, {"b", alt_pb()}};
  return c;
}

inline domcert::SwitchingSystem single_mode(const Matrix& a) {
  domcert::SwitchingSystem s;
  s.n = static_cast<int>(a.rows());
  s.modes = {a};
  s.automaton = domcert::Automaton({"a"}, 1, {{"a", 1, "a"}});
  return s;
}

inline Matrix random_matrix(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(rng);
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, int n) {
  const Matrix m = random_matrix(rng, n);
  return 0.5 * (m + m.transpose());
}

}  // namespace fixtures
