#pragma once

// Model checking over an explored state graph.
//
// Safety patterns are checked with a may-armed dataflow over the graph and,
// once a violation is known to exist, a product BFS that yields the shortest
// counterexample. Obligations are checked on the product of the graph with
// the observation valuation. Liveness uses a least-fixed-point attractor.

#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "marijke/explorer.hpp"
#include "marijke/monitor.hpp"

namespace marijke {

using Index = StateGraph::Index;

/// Shortest action sequence from the initial state to every state, as a
/// BFS parent tree.
class PathTree {
public:
  explicit PathTree(const StateGraph& g) : g_(&g), parent_edge_(g.size(), none) {
    std::vector<std::uint8_t> seen(g.size(), 0);
    std::vector<Index> queue{0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Index s = queue[head];
      for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e) {
        const Index d = g.edge_dst(e);
        if (!seen[d]) {
          seen[d] = 1;
          parent_edge_[d] = e;
          queue.push_back(d);
        }
      }
    }
  }

  /// Actions leading from the initial state to `s`.
  std::vector<Action> path_to(Index s) const {
    std::vector<std::size_t> edges;
    while (s != 0) {
      const std::size_t e = parent_edge_[s];
      if (e == none)
        throw CheckerError("state is not reachable in the explored graph");
      edges.push_back(e);
      s = source(e);
    }
    std::reverse(edges.begin(), edges.end());
    return g_->actions_of(edges);
  }

  /// Source state of an edge (binary search over the CSR offsets).
  Index source(std::size_t e) const {
    Index lo = 0, hi = static_cast<Index>(g_->size());
    while (hi - lo > 1) {
      const Index mid = lo + (hi - lo) / 2;
      if (g_->edge_begin(mid) <= e)
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  }

private:
  static constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  const StateGraph* g_;
  std::vector<std::size_t> parent_edge_;
};

// ---------------------------------------------------------------------------
// Safety

struct SafetyResult {
  bool holds = true;
  std::size_t binding = 0;
  std::string binding_text;
  std::vector<Action> counterexample; ///< ends with the violating action
};

/// Checks one compiled pattern against every path of the graph.
inline SafetyResult check_safety_product(const StateGraph& g, const MonitorAutomaton& m) {
  const std::size_t words = m.words();
  const std::size_t n = g.size();
  std::vector<std::uint64_t> armed(n * words, 0);
  std::vector<std::uint64_t> violated(words, 0);
  // Every state is processed once in index order; states whose armed set
  // grows afterwards are queued again.
  std::vector<std::uint8_t> queued(n, 1);
  std::deque<Index> work;
  for (std::size_t w = 0; w < words; ++w)
    armed[w] = m.initial()[w];
  for (Index s = 0; s < n; ++s)
    work.push_back(s);
  while (!work.empty()) {
    const Index s = work.front();
    work.pop_front();
    queued[s] = 0;
    const std::uint64_t* a = &armed[s * words];
    for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e) {
      const std::uint32_t code = g.edge_action(e);
      const std::uint64_t* gen = m.gen(code);
      const std::uint64_t* kill = m.kill(code);
      const std::uint64_t* trip = m.trip(code);
      std::uint64_t* b = &armed[g.edge_dst(e) * words];
      bool grew = false;
      for (std::size_t w = 0; w < words; ++w) {
        violated[w] |= a[w] & trip[w];
        const std::uint64_t next = b[w] | gen[w] | (a[w] & ~kill[w]);
        if (next != b[w]) {
          b[w] = next;
          grew = true;
        }
      }
      if (grew && !queued[g.edge_dst(e)]) {
        queued[g.edge_dst(e)] = 1;
        work.push_back(g.edge_dst(e));
      }
    }
  }

  SafetyResult best;
  for (std::size_t w = 0; w < words; ++w) {
    for (std::uint64_t bits = violated[w]; bits; bits &= bits - 1) {
      const std::size_t k = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
      // Product BFS over (state, armed bit) for binding k.
      const std::uint64_t bit = std::uint64_t{1} << (k % 64);
      std::vector<std::uint32_t> parent(2 * n, std::numeric_limits<std::uint32_t>::max());
      std::vector<std::uint32_t> via(2 * n, 0);
      std::vector<std::uint32_t> queue;
      const std::uint32_t start = (m.initial()[w] & bit) ? 1u : 0u;
      parent[start] = start;
      queue.push_back(start);
      std::optional<std::pair<std::uint32_t, std::uint32_t>> hit; // node, edge
      for (std::size_t head = 0; head < queue.size() && !hit; ++head) {
        const std::uint32_t node = queue[head];
        const Index s = node / 2;
        const bool on = node & 1u;
        for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e) {
          const std::uint32_t code = g.edge_action(e);
          if (on && (m.trip(code)[w] & bit)) {
            hit = std::pair{node, static_cast<std::uint32_t>(e)};
            break;
          }
          const bool next_on = (m.gen(code)[w] & bit) || (on && !(m.kill(code)[w] & bit));
          const std::uint32_t d = g.edge_dst(e) * 2 + (next_on ? 1u : 0u);
          if (parent[d] == std::numeric_limits<std::uint32_t>::max()) {
            parent[d] = node;
            via[d] = static_cast<std::uint32_t>(e);
            queue.push_back(d);
          }
        }
      }
      if (!hit)
        throw CheckerError("internal: dataflow reported a violation the product search did not find");
      std::vector<std::size_t> edges{hit->second};
      for (std::uint32_t node = hit->first; node != start; node = parent[node])
        edges.push_back(via[node]);
      std::reverse(edges.begin(), edges.end());
      if (best.holds || edges.size() < best.counterexample.size()) {
        best.holds = false;
        best.binding = k;
        best.binding_text = m.describe(k);
        best.counterexample = g.actions_of(edges);
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Obligations

struct InevitabilityResult {
  bool holds = true;
  std::uint64_t triggers = 0; ///< trigger edges whose condition held
  std::vector<Action> counterexample; ///< up to the Stable state the burst ended in
  std::size_t trigger_index = 0;      ///< position of the trigger in the counterexample
};

/// Checks that every triggered obligation is discharged on every burst.
inline InevitabilityResult check_inevitability(const StateGraph& g, const ObligationAutomaton& m) {
  struct Node {
    Index state;
    std::uint64_t vals;
    std::uint32_t parent;
    std::uint32_t edge;
  };
  constexpr std::uint64_t unset = std::numeric_limits<std::uint64_t>::max();
  const std::size_t nv = m.spec().vars.size();
  std::vector<std::uint64_t> primary(g.size(), unset);
  struct KeyHash {
    std::size_t operator()(const std::pair<Index, std::uint64_t>& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.second * 0x9e3779b97f4a7c15ull ^ k.first);
    }
  };
  // Valuations beyond the first one seen at a state.
  std::unordered_set<std::pair<Index, std::uint64_t>, KeyHash> overflow;
  std::unordered_set<Index> burst_ok; // trigger destinations known to discharge

  std::vector<Node> nodes;
  std::vector<std::uint8_t> vals(nv), next(nv);
  auto visit = [&](Index s, std::uint64_t v, std::uint32_t parent, std::uint32_t edge) {
    if (primary[s] == unset)
      primary[s] = v;
    else if (primary[s] == v)
      return;
    else if (!overflow.insert({s, v}).second)
      return;
    nodes.push_back({s, v, parent, edge});
  };

  // Depth-first check of the burst tree below `s`; returns the failing edge
  // path or nothing.
  std::vector<std::size_t> failing;
  auto burst = [&](auto&& self, Index s, std::uint32_t pending) -> bool {
    if (g.tag(s) == ModeTag::stable)
      return pending == 0;
    for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e) {
      const auto& i = m.info(g.edge_action(e));
      if (i.suppress)
        continue;
      const std::uint32_t left = pending & ~i.discharges;
      if (!self(self, g.edge_dst(e), left)) {
        failing.push_back(e);
        return false;
      }
    }
    return true;
  };

  InevitabilityResult r;
  std::uint8_t init[32];
  for (std::size_t v = 0; v < nv; ++v)
    init[v] = m.initial()[v];
  visit(0, ObligationAutomaton::pack(init, nv), 0, 0);
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    const Node node = nodes[head];
    ObligationAutomaton::unpack(node.vals, vals.data(), nv);
    const bool stable = g.tag(node.state) == ModeTag::stable;
    for (std::size_t e = g.edge_begin(node.state); e < g.edge_end(node.state); ++e) {
      const std::uint32_t code = g.edge_action(e);
      const auto& i = m.info(code);
      if (stable && i.trigger && m.condition(vals.data())) {
        ++r.triggers;
        const Index d = g.edge_dst(e);
        if (!burst_ok.count(d)) {
          failing.clear();
          if (burst(burst, d, m.all_obligations())) {
            burst_ok.insert(d);
          } else {
            std::vector<std::size_t> edges;
            for (std::uint32_t k = static_cast<std::uint32_t>(head); k != 0; k = nodes[k].parent)
              edges.push_back(nodes[k].edge);
            std::reverse(edges.begin(), edges.end());
            r.trigger_index = edges.size();
            edges.push_back(e);
            edges.insert(edges.end(), failing.rbegin(), failing.rend());
            r.holds = false;
            r.counterexample = g.actions_of(edges);
            return r;
          }
        }
      }
      std::uint64_t nvals = node.vals;
      if (i.updates) {
        next = vals;
        m.update(code, next.data());
        nvals = ObligationAutomaton::pack(next.data(), nv);
      }
      visit(g.edge_dst(e), nvals, static_cast<std::uint32_t>(head), static_cast<std::uint32_t>(e));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Liveness

/// A predicate over the controller's parameters.
struct StateCondition {
  enum class Field : std::uint8_t { gate, paddle, entering, leaving, water, emergency, barrier };
  Field field = Field::gate;
  LockId lock = LockId::north;
  StreamSide side = StreamSide::upstream;
  std::uint8_t mask = 0;      ///< accepted values of the field
  bool every = false;         ///< gates / paddles: all orientations instead of some

  bool holds(const ControllerParams& p, const PlantConfig& config) const {
    auto in = [&](std::uint8_t v) { return (mask >> v) & 1u; };
    switch (field) {
    case Field::gate:
    case Field::paddle: {
      bool any = false, all = true;
      for (Orientation o : config.orientations) {
        const Position x = field == Field::gate ? p.gate(lock, side, o) : p.paddle(lock, side, o);
        any = any || in(to_u8(x));
        all = all && in(to_u8(x));
      }
      return every ? all : any;
    }
    case Field::entering: return in(to_u8(p.entering(lock, side)));
    case Field::leaving: return in(to_u8(p.leaving(lock, side)));
    case Field::water: return in(p.water(lock, side));
    case Field::emergency: return in(p.in_emergency(lock));
    case Field::barrier: return in(to_u8(p.barrier_status));
    }
    return false;
  }
};

/// Actions the player may choose, optionally only where a condition holds.
struct GuardedActions {
  ActionPredicate actions;
  std::optional<StateCondition> when;
};

struct LivenessSpec {
  std::string label;
  std::vector<GuardedActions> allowed; ///< existential choices at Stable and Emitting states
  /// Choices whose every value must lead to the goal, e.g. polling a sensor
  /// without controlling what it reports.
  std::vector<GuardedActions> universal_choices;
  ActionPredicate essential_reads;     ///< read values the player may rely on
  ActionPredicate universal_reads;     ///< reads whose every value must be handled
  std::vector<ActionPredicate> goals;  ///< each must be reachable
  std::optional<ActionPredicate> scope; ///< only check successors of these edges
  std::optional<StateCondition> scope_when;
};

struct LivenessResult {
  bool holds = true;
  std::vector<std::uint64_t> winning; ///< winning state count per goal
  std::uint64_t scoped_edges = 0;     ///< edges the scope selected
  std::size_t failing_goal = 0;
  std::vector<Action> witness; ///< path to a losing state
};

/// Reverse adjacency of a graph, shared by liveness checks.
class ReverseGraph {
public:
  explicit ReverseGraph(const StateGraph& g) : offsets_(g.size() + 1, 0), src_(g.edge_count()), edge_(g.edge_count()) {
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      ++offsets_[g.edge_dst(e) + 1];
    for (std::size_t i = 0; i < g.size(); ++i)
      offsets_[i + 1] += offsets_[i];
    std::vector<std::uint64_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (Index s = 0; s < g.size(); ++s)
      for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e) {
        const std::uint64_t k = fill[g.edge_dst(e)]++;
        src_[k] = s;
        edge_[k] = static_cast<std::uint32_t>(e);
      }
  }
  std::uint64_t begin(Index s) const { return offsets_[s]; }
  std::uint64_t end(Index s) const { return offsets_[s + 1]; }
  Index src(std::uint64_t k) const { return src_[k]; }
  std::uint32_t edge(std::uint64_t k) const { return edge_[k]; }

private:
  std::vector<std::uint64_t> offsets_;
  std::vector<Index> src_;
  std::vector<std::uint32_t> edge_;
};

/// Computes the set of states from which the player can force `goal`.
inline std::vector<std::uint8_t> attractor(const StateGraph& g, const ReverseGraph& rev, const LivenessSpec& spec,
                                           const ActionPredicate& goal) {
  const Alphabet& alpha = g.controller().alphabet();
  const PlantConfig& config = g.controller().config();
  const std::size_t n = g.size();
  // Per-code classification: 0 = not allowed, 1 = allowed, 2 + k = guarded by allowed[k].
  std::vector<std::uint8_t> allowed(alpha.size(), 0), essential(alpha.size(), 0), universal(alpha.size(), 0),
      goal_code(alpha.size(), 0);
  for (std::uint32_t c = 0; c < alpha.size(); ++c) {
    const Action& a = alpha.decode(c);
    for (std::size_t k = 0; k < spec.allowed.size() && !allowed[c]; ++k)
      if (spec.allowed[k].actions.matches(a))
        allowed[c] = spec.allowed[k].when ? static_cast<std::uint8_t>(2 + k) : 1;
    essential[c] = spec.essential_reads.matches(a);
    universal[c] = spec.universal_reads.matches(a);
    goal_code[c] = goal.matches(a);
  }

  std::vector<std::uint8_t> win(n, 0);
  std::vector<std::uint32_t> count(n, 0); // remaining successors for universal states, 0 = existential
  std::vector<Index> queue;
  for (Index s = 0; s < n; ++s) {
    bool has_goal = false, has_essential = false;
    for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e) {
      has_goal = has_goal || goal_code[g.edge_action(e)];
      has_essential = has_essential || essential[g.edge_action(e)];
    }
    if (has_goal) {
      win[s] = 1;
      queue.push_back(s);
      continue;
    }
    if (g.tag(s) == ModeTag::awaiting && !has_essential) {
      for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e)
        if (!universal[g.edge_action(e)])
          throw CheckerError(spec.label + ": read " + to_string(alpha.decode(g.edge_action(e))) +
                             " is neither essential nor universal");
      count[s] = static_cast<std::uint32_t>(g.edge_end(s) - g.edge_begin(s));
    }
  }

  auto edge_allowed = [&](Index p, std::uint32_t e) {
    const std::uint32_t c = g.edge_action(e);
    if (g.tag(p) == ModeTag::awaiting)
      return essential[c] != 0;
    if (allowed[c] == 0)
      return false;
    if (allowed[c] == 1)
      return true;
    return spec.allowed[allowed[c] - 2].when->holds(g.state(p).params, config);
  };

  // Remaining unwon edges per universal choice and state; 0 = not offered.
  std::vector<std::vector<std::uint32_t>> group_left(spec.universal_choices.size());
  std::vector<std::int8_t> group_of(alpha.size(), -1);
  for (std::size_t k = 0; k < spec.universal_choices.size(); ++k) {
    const GuardedActions& gc = spec.universal_choices[k];
    for (std::uint32_t c = 0; c < alpha.size(); ++c)
      if (group_of[c] < 0 && gc.actions.matches(alpha.decode(c)))
        group_of[c] = static_cast<std::int8_t>(k);
    group_left[k].assign(n, 0);
    for (Index s = 0; s < n; ++s) {
      if (g.tag(s) != ModeTag::stable || win[s])
        continue;
      std::uint32_t edges = 0;
      for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e)
        edges += group_of[g.edge_action(e)] == static_cast<std::int8_t>(k);
      if (edges && (!gc.when || gc.when->holds(g.state(s).params, config)))
        group_left[k][s] = edges;
    }
  }

  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Index s = queue[head];
    for (std::uint64_t k = rev.begin(s); k < rev.end(s); ++k) {
      const Index p = rev.src(k);
      if (win[p])
        continue;
      bool won = count[p] ? --count[p] == 0 : edge_allowed(p, rev.edge(k));
      if (!won && !count[p]) {
        const std::int8_t grp = group_of[g.edge_action(rev.edge(k))];
        if (grp >= 0 && group_left[grp][p])
          won = --group_left[grp][p] == 0;
      }
      if (won) {
        win[p] = 1;
        queue.push_back(p);
      }
    }
  }
  return win;
}

inline LivenessResult check_liveness(const StateGraph& g, const ReverseGraph& rev, const PathTree& paths,
                                     const LivenessSpec& spec) {
  if (!g.exhaustive())
    throw CheckerError("liveness needs an exhaustively explored graph");
  const Alphabet& alpha = g.controller().alphabet();
  const PlantConfig& config = g.controller().config();
  LivenessResult r;
  std::vector<std::uint8_t> scope_code;
  if (spec.scope) {
    scope_code.resize(alpha.size());
    for (std::uint32_t c = 0; c < alpha.size(); ++c)
      scope_code[c] = spec.scope->matches(alpha.decode(c));
  }
  for (std::size_t k = 0; k < spec.goals.size(); ++k) {
    const auto win = attractor(g, rev, spec, spec.goals[k]);
    r.winning.push_back(static_cast<std::uint64_t>(std::count(win.begin(), win.end(), 1)));
    if (!r.holds)
      continue;
    if (!spec.scope) {
      for (Index s = 0; s < g.size(); ++s)
        if (!win[s]) {
          r.holds = false;
          r.failing_goal = k;
          r.witness = paths.path_to(s);
          break;
        }
      continue;
    }
    std::uint64_t scoped = 0;
    for (Index s = 0; s < g.size() && r.holds; ++s)
      for (std::size_t e = g.edge_begin(s); e < g.edge_end(s); ++e) {
        if (!scope_code[g.edge_action(e)])
          continue;
        if (spec.scope_when && !spec.scope_when->holds(g.state(s).params, config))
          continue;
        ++scoped;
        if (!win[g.edge_dst(e)]) {
          r.holds = false;
          r.failing_goal = k;
          r.witness = paths.path_to(s);
          r.witness.push_back(alpha.decode(g.edge_action(e)));
          break;
        }
      }
    r.scoped_edges = scoped;
  }
  return r;
}

} // namespace marijke
