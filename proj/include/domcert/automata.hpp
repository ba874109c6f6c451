#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace domcert {

using State = std::string;
using Label = int;  // 1..N

struct Transition {
  State from;
  Label label = 0;
  State to;

  std::string str() const;  // "a -1-> b"
  friend auto operator<=>(const Transition&, const Transition&) = default;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// Labeled graph (Q, Sigma, delta) whose paths define admissible switching.
// States are kept in lexicographic order; transitions in (from, label, to) order.
class Automaton {
 public:
  Automaton() = default;
  // Throws InvalidInput on duplicate states or transitions, undeclared
  // states, or labels outside 1..alphabet_size.
  Automaton(std::vector<State> states, int alphabet_size, std::vector<Transition> transitions);

  const std::vector<State>& states() const noexcept { return states_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  int alphabet_size() const noexcept { return alphabet_size_; }
  bool empty() const noexcept { return states_.empty(); }
  std::size_t state_count() const noexcept { return states_.size(); }

  // Index of a state in states(); throws InvalidInput when unknown.
  std::size_t index_of(const State& q) const;
  bool has_state(const State& q) const;
  bool has_transition(const Transition& t) const;

  // Transition indices leaving / entering the state with the given index.
  const std::vector<std::size_t>& outgoing(std::size_t q) const { return out_[q]; }
  const std::vector<std::size_t>& incoming(std::size_t q) const { return in_[q]; }
  std::size_t from_index(std::size_t t) const { return from_idx_[t]; }
  std::size_t to_index(std::size_t t) const { return to_idx_[t]; }

  // Set of states reached from `current` by reading `label`.
  std::vector<bool> post(const std::vector<bool>& current, Label label) const;

 private:
  std::vector<State> states_;
  int alphabet_size_ = 0;
  std::vector<Transition> transitions_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::size_t> from_idx_;
  std::vector<std::size_t> to_idx_;
};

// Closed elementary path of transitions, rotated so that its smallest state
// comes first.
struct Cycle {
  std::vector<Transition> transitions;

  std::size_t size() const noexcept { return transitions.size(); }
  std::vector<State> states() const;
  std::string str() const;  // "a -1-> b -2-> a"
  friend bool operator==(const Cycle&, const Cycle&) = default;
};

enum class SignalKind { finite, periodic };

struct SwitchingSignal {
  std::vector<Label> labels;
  SignalKind kind = SignalKind::finite;

  // sigma(t); periodic signals wrap around.
  Label at(std::size_t t) const;
  std::string str() const;
};

struct WitnessedSignal {
  SwitchingSignal signal;
  std::vector<State> states;  // q_0 .. q_L with q_t -sigma(t)-> q_{t+1}
};

// Largest sub-automaton in which every state has a predecessor and a
// successor. Throws EmptyLanguage when nothing survives.
Automaton trim_core(const Automaton& aut);

struct PathCompleteness {
  bool complete = false;
  std::vector<Label> counterexample;  // empty when complete
};

// Factor-language inclusion: is every finite label sequence readable in
// `language` also readable in `candidate`? Both automata should be trimmed.
PathCompleteness path_complete_check(const Automaton& language, const Automaton& candidate);

inline constexpr std::size_t kDefaultCycleBudget = 10000;

// All elementary cycles (Johnson's algorithm on the state graph, expanded over
// parallel labeled transitions). Throws BudgetExceeded past `max_cycles`.
std::vector<Cycle> enumerate_cycles(const Automaton& aut,
                                    std::size_t max_cycles = kDefaultCycleBudget);

// Uniformly random walk of `length` transitions, reproducible from `seed`.
WitnessedSignal generate_signal(const Automaton& aut, std::size_t length, std::uint64_t seed);

// Throws AdmissibilityError at the first label that no path can read.
// Periodic signals are checked as bi-infinite repetitions of their block.
void require_admissible(const Automaton& aut, const SwitchingSignal& signal);

// A state path q_0..q_L reading the first `labels.size()` labels.
std::vector<State> witness_path(const Automaton& aut, std::span<const Label> labels);

// States that are neither on a cycle nor on a path between two cycle states.
std::vector<State> states_outside_loops(const Automaton& aut);

}  // namespace domcert
