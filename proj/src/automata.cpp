#include "domcert/automata.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "domcert/errors.hpp"

namespace domcert {

namespace {

// Strongly connected components restricted to vertices with `active[v]`.
// Returns the component id of every vertex (-1 when inactive).
std::vector<int> strong_components(const std::vector<std::vector<std::size_t>>& adj,
                                   const std::vector<bool>& active) {
  const std::size_t n = adj.size();
  std::vector<int> comp(n, -1);
  std::vector<int> index(n, -1);
  std::vector<int> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  int n_comp = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (!active[w]) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w = 0;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = n_comp;
      } while (w != v);
      ++n_comp;
    }
  };

  for (std::size_t v = 0; v < n; ++v) {
    if (active[v] && index[v] < 0) visit(v);
  }
  return comp;
}

// Successor lists on states, parallel labeled edges merged.
std::vector<std::vector<std::size_t>> state_graph(const Automaton& aut) {
  std::vector<std::vector<std::size_t>> adj(aut.state_count());
  for (std::size_t q = 0; q < aut.state_count(); ++q) {
    for (std::size_t t : aut.outgoing(q)) adj[q].push_back(aut.to_index(t));
    std::sort(adj[q].begin(), adj[q].end());
    adj[q].erase(std::unique(adj[q].begin(), adj[q].end()), adj[q].end());
  }
  return adj;
}

// States lying on at least one cycle.
std::vector<bool> cyclic_states(const Automaton& aut) {
  const auto adj = state_graph(aut);
  const std::size_t n = adj.size();
  const auto comp = strong_components(adj, std::vector<bool>(n, true));
  std::vector<int> comp_size(n, 0);
  for (std::size_t v = 0; v < n; ++v) ++comp_size[static_cast<std::size_t>(comp[v])];
  std::vector<bool> cyclic(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    const bool self_loop = std::binary_search(adj[v].begin(), adj[v].end(), v);
    cyclic[v] = self_loop || comp_size[static_cast<std::size_t>(comp[v])] > 1;
  }
  return cyclic;
}

std::vector<bool> reachable_from(const std::vector<std::vector<std::size_t>>& adj,
                                 const std::vector<bool>& seeds) {
  std::vector<bool> seen = seeds;
  std::deque<std::size_t> queue;
  for (std::size_t v = 0; v < seeds.size(); ++v) {
    if (seeds[v]) queue.push_back(v);
  }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

bool any_of(const std::vector<bool>& set) {
  return std::find(set.begin(), set.end(), true) != set.end();
}

std::string labels_str(std::span<const Label> labels) {
  std::ostringstream os;
  for (std::size_t i = 0; i < labels.size(); ++i) os << (i ? "," : "") << labels[i];
  return os.str();
}

// 53 random bits mapped to [0, 1); avoids library-specific distributions so
// that seeds reproduce across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string Transition::str() const {
  std::ostringstream os;
  os << from << " -" << label << "-> " << to;
  return os.str();
}

Automaton::Automaton(std::vector<State> states, int alphabet_size,
                     std::vector<Transition> transitions)
    : states_(std::move(states)),
      alphabet_size_(alphabet_size),
      transitions_(std::move(transitions)) {
  if (alphabet_size_ < 1) throw InvalidInput("automaton: alphabet size must be at least 1");
  std::sort(states_.begin(), states_.end());
  if (std::adjacent_find(states_.begin(), states_.end()) != states_.end()) {
    throw InvalidInput("automaton: duplicate state '" +
                       *std::adjacent_find(states_.begin(), states_.end()) + "'");
  }
  std::sort(transitions_.begin(), transitions_.end());
  if (auto dup = std::adjacent_find(transitions_.begin(), transitions_.end());
      dup != transitions_.end()) {
    throw InvalidInput("automaton: duplicate transition " + dup->str());
  }
  out_.assign(states_.size(), {});
  in_.assign(states_.size(), {});
  from_idx_.reserve(transitions_.size());
  to_idx_.reserve(transitions_.size());
  for (std::size_t k = 0; k < transitions_.size(); ++k) {
    const Transition& t = transitions_[k];
    if (t.label < 1 || t.label > alphabet_size_) {
      throw InvalidInput("automaton: label out of range in " + t.str());
    }
    if (!has_state(t.from) || !has_state(t.to)) {
      throw InvalidInput("automaton: transition " + t.str() + " references an undeclared state");
    }
    const std::size_t f = index_of(t.from);
    const std::size_t g = index_of(t.to);
    from_idx_.push_back(f);
    to_idx_.push_back(g);
    out_[f].push_back(k);
    in_[g].push_back(k);
  }
}

bool Automaton::has_state(const State& q) const {
  return std::binary_search(states_.begin(), states_.end(), q);
}

std::size_t Automaton::index_of(const State& q) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), q);
  if (it == states_.end() || *it != q) throw InvalidInput("automaton: unknown state '" + q + "'");
  return static_cast<std::size_t>(it - states_.begin());
}

bool Automaton::has_transition(const Transition& t) const {
  return std::binary_search(transitions_.begin(), transitions_.end(), t);
}

std::vector<bool> Automaton::post(const std::vector<bool>& current, Label label) const {
  std::vector<bool> next(states_.size(), false);
  for (std::size_t q = 0; q < states_.size(); ++q) {
    if (!current[q]) continue;
    for (std::size_t t : out_[q]) {
      if (transitions_[t].label == label) next[to_idx_[t]] = true;
    }
  }
  return next;
}

std::vector<State> Cycle::states() const {
  std::vector<State> out;
  out.reserve(transitions.size());
  for (const auto& t : transitions) out.push_back(t.from);
  return out;
}

std::string Cycle::str() const {
  if (transitions.empty()) return "";
  std::ostringstream os;
  os << transitions.front().from;
  for (const auto& t : transitions) os << " -" << t.label << "-> " << t.to;
  return os.str();
}

Label SwitchingSignal::at(std::size_t t) const {
  if (labels.empty()) throw InvalidInput("switching signal: empty");
  if (kind == SignalKind::periodic) return labels[t % labels.size()];
  if (t >= labels.size()) throw InvalidInput("switching signal: index past the end");
  return labels[t];
}

std::string SwitchingSignal::str() const {
  return (kind == SignalKind::periodic ? "periodic:" : "") + labels_str(labels);
}

Automaton trim_core(const Automaton& aut) {
  const std::size_t n = aut.state_count();
  std::vector<bool> alive(n, true);
  std::vector<int> indeg(n, 0);
  std::vector<int> outdeg(n, 0);
  for (std::size_t t = 0; t < aut.transitions().size(); ++t) {
    ++outdeg[aut.from_index(t)];
    ++indeg[aut.to_index(t)];
  }
  std::deque<std::size_t> queue;
  for (std::size_t q = 0; q < n; ++q) {
    if (indeg[q] == 0 || outdeg[q] == 0) {
      alive[q] = false;
      queue.push_back(q);
    }
  }
  while (!queue.empty()) {
    const std::size_t q = queue.front();
    queue.pop_front();
    for (std::size_t t : aut.outgoing(q)) {
      const std::size_t w = aut.to_index(t);
      if (alive[w] && --indeg[w] == 0) {
        alive[w] = false;
        queue.push_back(w);
      }
    }
    for (std::size_t t : aut.incoming(q)) {
      const std::size_t w = aut.from_index(t);
      if (alive[w] && --outdeg[w] == 0) {
        alive[w] = false;
        queue.push_back(w);
      }
    }
  }

  std::vector<State> states;
  for (std::size_t q = 0; q < n; ++q) {
    if (alive[q]) states.push_back(aut.states()[q]);
  }
  if (states.empty()) {
    throw EmptyLanguage("automaton admits no bi-infinite path (empty core)");
  }
  std::vector<Transition> transitions;
  for (std::size_t t = 0; t < aut.transitions().size(); ++t) {
    if (alive[aut.from_index(t)] && alive[aut.to_index(t)]) {
      transitions.push_back(aut.transitions()[t]);
    }
  }
  return Automaton(std::move(states), aut.alphabet_size(), std::move(transitions));
}

PathCompleteness path_complete_check(const Automaton& language, const Automaton& candidate) {
  if (language.alphabet_size() != candidate.alphabet_size()) {
    throw InvalidInput("path-completeness: alphabet mismatch (" +
                       std::to_string(language.alphabet_size()) + " vs " +
                       std::to_string(candidate.alphabet_size()) + " labels)");
  }

  // Product of `language` with the subset construction of `candidate`,
  // every state of both initial. Breadth-first, so counterexamples are shortest.
  using Node = std::pair<std::size_t, std::vector<bool>>;
  struct Origin {
    std::size_t parent;
    Label label;
  };
  constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

  std::map<Node, std::size_t> seen;
  std::vector<Node> nodes;
  std::vector<Origin> origin;
  std::deque<std::size_t> queue;
  const std::vector<bool> all(candidate.state_count(), true);

  for (std::size_t l = 0; l < language.state_count(); ++l) {
    Node node{l, all};
    if (seen.emplace(node, nodes.size()).second) {
      nodes.push_back(std::move(node));
      origin.push_back({kRoot, 0});
      queue.push_back(nodes.size() - 1);
    }
  }

  auto word_to = [&](std::size_t id) {
    std::vector<Label> word;
    while (id != kRoot && origin[id].parent != kRoot) {
      word.push_back(origin[id].label);
      id = origin[id].parent;
    }
    std::reverse(word.begin(), word.end());
    return word;
  };

  while (!queue.empty()) {
    const std::size_t id = queue.front();
    queue.pop_front();
    const std::size_t l = nodes[id].first;
    for (std::size_t t : language.outgoing(l)) {
      const Label sigma = language.transitions()[t].label;
      std::vector<bool> macro = candidate.post(nodes[id].second, sigma);
      if (!any_of(macro)) {
        PathCompleteness result;
        result.complete = false;
        result.counterexample = word_to(id);
        result.counterexample.push_back(sigma);
        return result;
      }
      Node next{language.to_index(t), std::move(macro)};
      if (seen.find(next) == seen.end()) {
        seen.emplace(next, nodes.size());
        nodes.push_back(std::move(next));
        origin.push_back({id, sigma});
        queue.push_back(nodes.size() - 1);
      }
    }
  }
  return PathCompleteness{true, {}};
}

std::vector<Cycle> enumerate_cycles(const Automaton& aut, std::size_t max_cycles) {
  const auto adj = state_graph(aut);
  const std::size_t n = adj.size();
  std::vector<Cycle> cycles;

  // Expands a cycle on states into every labeled variant.
  auto emit = [&](const std::vector<std::size_t>& path) {
    std::vector<std::vector<const Transition*>> hops;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const std::size_t u = path[i];
      const std::size_t w = path[(i + 1) % path.size()];
      std::vector<const Transition*> options;
      for (std::size_t t : aut.outgoing(u)) {
        if (aut.to_index(t) == w) options.push_back(&aut.transitions()[t]);
      }
      hops.push_back(std::move(options));
    }
    std::vector<std::size_t> pick(hops.size(), 0);
    while (true) {
      if (cycles.size() >= max_cycles) {
        throw BudgetExceeded("cycle enumeration exceeded the budget of " +
                                 std::to_string(max_cycles) + " cycles",
                             max_cycles);
      }
      Cycle c;
      for (std::size_t i = 0; i < hops.size(); ++i) c.transitions.push_back(*hops[i][pick[i]]);
      cycles.push_back(std::move(c));
      std::size_t i = 0;
      for (; i < pick.size(); ++i) {
        if (++pick[i] < hops[i].size()) break;
        pick[i] = 0;
      }
      if (i == pick.size()) break;
    }
  };

  // Johnson's algorithm: for each start s (ascending), the cycles through s
  // inside the strongly connected component of s in the subgraph {v >= s}.
  std::vector<bool> blocked(n, false);
  std::vector<std::set<std::size_t>> block_map(n);
  std::vector<std::size_t> stack;
  std::vector<bool> in_component(n, false);
  std::size_t start = 0;

  std::function<void(std::size_t)> unblock = [&](std::size_t u) {
    blocked[u] = false;
    auto pending = std::move(block_map[u]);
    block_map[u].clear();
    for (std::size_t w : pending) {
      if (blocked[w]) unblock(w);
    }
  };

  std::function<bool(std::size_t)> circuit = [&](std::size_t v) {
    bool found = false;
    stack.push_back(v);
    blocked[v] = true;
    for (std::size_t w : adj[v]) {
      if (!in_component[w]) continue;
      if (w == start) {
        emit(stack);
        found = true;
      } else if (!blocked[w] && circuit(w)) {
        found = true;
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (std::size_t w : adj[v]) {
        if (in_component[w]) block_map[w].insert(v);
      }
    }
    stack.pop_back();
    return found;
  };

  while (start < n) {
    std::vector<bool> active(n, false);
    for (std::size_t v = start; v < n; ++v) active[v] = true;
    const auto comp = strong_components(adj, active);

    // Least vertex >= start whose component can carry a cycle.
    std::size_t next = n;
    for (std::size_t v = start; v < n && next == n; ++v) {
      const bool self_loop = std::binary_search(adj[v].begin(), adj[v].end(), v);
      std::size_t size = 0;
      for (std::size_t w = start; w < n; ++w) size += (comp[w] == comp[v]) ? 1 : 0;
      if (self_loop || size > 1) next = v;
    }
    if (next == n) break;
    start = next;
    for (std::size_t v = 0; v < n; ++v) {
      in_component[v] = active[v] && comp[v] == comp[start];
      blocked[v] = false;
      block_map[v].clear();
    }
    circuit(start);
    ++start;
  }

  std::sort(cycles.begin(), cycles.end(), [](const Cycle& a, const Cycle& b) {
    return a.transitions < b.transitions;
  });
  return cycles;
}

WitnessedSignal generate_signal(const Automaton& aut, std::size_t length, std::uint64_t seed) {
  if (aut.empty()) throw EmptyLanguage("generate_signal: empty automaton");
  if (length < 1) throw InvalidInput("generate_signal: length must be at least 1");
  const std::size_t n = aut.state_count();

  // weight[k][q] is proportional to the number of walks of k transitions
  // leaving q; each level is rescaled to max 1 to stay finite.
  std::vector<std::vector<double>> weight(length + 1, std::vector<double>(n, 0.0));
  std::fill(weight[0].begin(), weight[0].end(), 1.0);
  for (std::size_t k = 1; k <= length; ++k) {
    double top = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      double w = 0.0;
      for (std::size_t t : aut.outgoing(q)) w += weight[k - 1][aut.to_index(t)];
      weight[k][q] = w;
      top = std::max(top, w);
    }
    if (top == 0.0) {
      throw EmptyLanguage("generate_signal: no admissible walk of length " +
                          std::to_string(length));
    }
    for (double& w : weight[k]) w /= top;
  }

  std::mt19937_64 rng(seed);
  auto draw = [&](const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = unit_uniform(rng) * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      if (u < w[i]) return i;
      u -= w[i];
    }
    // Rounding fallthrough: last positive entry.
    for (std::size_t i = w.size(); i-- > 0;) {
      if (w[i] > 0.0) return i;
    }
    return w.size();
  };

  WitnessedSignal out;
  out.signal.kind = SignalKind::finite;
  std::size_t q = draw(weight[length]);
  out.states.push_back(aut.states()[q]);
  for (std::size_t step = 0; step < length; ++step) {
    const std::size_t remaining = length - step;
    const auto& edges = aut.outgoing(q);
    std::vector<double> w;
    w.reserve(edges.size());
    for (std::size_t t : edges) w.push_back(weight[remaining - 1][aut.to_index(t)]);
    const std::size_t pick = edges[draw(w)];
    out.signal.labels.push_back(aut.transitions()[pick].label);
    q = aut.to_index(pick);
    out.states.push_back(aut.states()[q]);
  }
  return out;
}

void require_admissible(const Automaton& aut, const SwitchingSignal& signal) {
  if (signal.labels.empty()) throw InvalidInput("switching signal: empty");
  for (std::size_t i = 0; i < signal.labels.size(); ++i) {
    const Label l = signal.labels[i];
    if (l < 1 || l > aut.alphabet_size()) {
      throw AdmissibilityError("switching signal: label " + std::to_string(l) +
                                   " at position " + std::to_string(i) + " is not in the alphabet",
                               i);
    }
  }
  // A periodic word is admissible iff reading its block from all states
  // never empties the state set: the sets are nested, so after |Q| + 1
  // repetitions they have stabilized on a set closed under the block.
  const std::size_t reps = signal.kind == SignalKind::periodic ? aut.state_count() + 1 : 1;
  const std::size_t total = reps * signal.labels.size();
  std::vector<bool> current(aut.state_count(), true);
  for (std::size_t t = 0; t < total; ++t) {
    current = aut.post(current, signal.at(t));
    if (!any_of(current)) {
      std::ostringstream os;
      os << "switching signal is not admissible: label " << signal.at(t) << " at position " << t
         << " cannot follow " << (t == 0 ? std::string("any state") : "the preceding labels");
      throw AdmissibilityError(os.str(), t);
    }
  }
}

std::vector<State> witness_path(const Automaton& aut, std::span<const Label> labels) {
  const std::size_t n = aut.state_count();
  std::vector<std::vector<bool>> reach;
  reach.emplace_back(n, true);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    reach.push_back(aut.post(reach.back(), labels[t]));
    if (!any_of(reach.back())) {
      throw AdmissibilityError("no state path reads label " + std::to_string(labels[t]) +
                                   " at position " + std::to_string(t),
                               t);
    }
  }
  std::vector<std::size_t> path(labels.size() + 1);
  path.back() = static_cast<std::size_t>(
      std::find(reach.back().begin(), reach.back().end(), true) - reach.back().begin());
  for (std::size_t t = labels.size(); t-- > 0;) {
    const std::size_t next = path[t + 1];
    for (std::size_t e : aut.incoming(next)) {
      const std::size_t from = aut.from_index(e);
      if (aut.transitions()[e].label == labels[t] && reach[t][from]) {
        path[t] = from;
        break;
      }
    }
  }
  std::vector<State> out;
  out.reserve(path.size());
  for (std::size_t q : path) out.push_back(aut.states()[q]);
  return out;
}

std::vector<State> states_outside_loops(const Automaton& aut) {
  const auto adj = state_graph(aut);
  std::vector<std::vector<std::size_t>> radj(adj.size());
  for (std::size_t v = 0; v < adj.size(); ++v) {
    for (std::size_t w : adj[v]) radj[w].push_back(v);
  }
  const auto cyclic = cyclic_states(aut);
  const auto after_loop = reachable_from(adj, cyclic);
  const auto before_loop = reachable_from(radj, cyclic);
  std::vector<State> bad;
  for (std::size_t q = 0; q < adj.size(); ++q) {
    if (!cyclic[q] && !(after_loop[q] && before_loop[q])) bad.push_back(aut.states()[q]);
  }
  return bad;
}

}  // namespace domcert
