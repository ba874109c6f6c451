#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domcert/automata.hpp"
#include "domcert/linalg.hpp"

namespace domcert {

// x(t+1) = A_sigma(t) x(t) with sigma constrained by an automaton.
struct SwitchingSystem {
  int n = 0;
  std::vector<Matrix> modes;  // modes[k] is A_{k+1}
  Automaton automaton;
  std::optional<Automaton> language;

  int alphabet_size() const noexcept { return static_cast<int>(modes.size()); }
  const Matrix& mode(Label label) const;

  // Throws InvalidInput on shape mismatches or an alphabet that differs from
  // the number of modes.
  void check() const;
};

// Parses a real literal: a JSON number, or a string holding a decimal or a
// fraction such as "-3/4".
double parse_real_literal(std::string_view text);

// System description file (JSON): keys `n`, `modes`, `automaton`, optional
// `language` and `description`. Throws ParseError with field context.
SwitchingSystem parse_system(std::string_view text);
SwitchingSystem load_system(const std::string& path);

// Automaton file: either {`alphabet_size`?, `states`, `transitions`} or a
// full system description, whose automaton is used.
Automaton parse_automaton_file(std::string_view text);
Automaton load_automaton(const std::string& path);

// Sorted-key, whitespace-free rendering of the parsed system with numbers in
// shortest round-trip form. Cosmetic edits of the file leave it unchanged.
std::string canonical_system_text(const SwitchingSystem& sys);

// SHA-256 of canonical_system_text, lowercase hex.
std::string system_fingerprint(const SwitchingSystem& sys);

// The same system restricted to the trimmed core of its automaton.
SwitchingSystem trimmed(const SwitchingSystem& sys);

std::string read_text_file(const std::string& path);

}  // namespace domcert
