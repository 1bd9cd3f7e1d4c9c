#pragma once

// Explicit-state exploration of the controller LTS.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "marijke/packed.hpp"

namespace marijke {

enum class ExploreMode { exhaustive, bounded, random };

struct ExploreOptions {
  ExploreMode mode = ExploreMode::exhaustive;
  std::uint64_t depth = 0;       ///< bounded mode
  std::uint64_t steps = 0;       ///< random mode
  std::uint64_t seed = 0;        ///< random mode
  std::uint64_t ceiling = 4'194'304;
  std::uint64_t max_states = 100'000'000; ///< memory budget
  unsigned threads = 1;
};

struct GraphStats {
  std::uint64_t states = 0;
  std::uint64_t stable_states = 0;
  std::uint64_t edges = 0;
  std::uint64_t depth = 0;
  double seconds = 0;
};

/// Exploration stopped by the state ceiling or the memory budget.
class ExploreLimitError : public CheckerError {
public:
  ExploreLimitError(const std::string& what, GraphStats partial, bool ceiling)
      : CheckerError(what), partial_(partial), ceiling_(ceiling) {}
  const GraphStats& partial() const noexcept { return partial_; }
  bool ceiling_exceeded() const noexcept { return ceiling_; }

private:
  GraphStats partial_;
  bool ceiling_;
};

/// The explored part of the LTS. States are numbered in BFS discovery order
/// (state 0 is initial); outgoing edges of a state are stored contiguously
/// in encoding order of their actions.
class StateGraph {
public:
  using Index = std::uint32_t;

  StateGraph(const Controller& controller)
      : controller_(&controller), codec_(controller.config()), words_(codec_.words()) {}

  const Controller& controller() const noexcept { return *controller_; }
  const StateCodec& codec() const noexcept { return codec_; }
  std::size_t size() const noexcept { return tags_.size(); }
  bool exhaustive() const noexcept { return exhaustive_; }
  const GraphStats& stats() const noexcept { return stats_; }

  ModeTag tag(Index i) const noexcept { return static_cast<ModeTag>(tags_[i]); }
  PackedState packed(Index i) const noexcept {
    PackedState p;
    for (unsigned k = 0; k < words_; ++k)
      p.w[k] = keys_[std::size_t{i} * words_ + k];
    return p;
  }
  ControllerState state(Index i) const { return codec_.unpack(packed(i)); }

  std::size_t edge_begin(Index i) const noexcept { return offsets_[i]; }
  std::size_t edge_end(Index i) const noexcept { return offsets_[i + 1]; }
  Index edge_dst(std::size_t e) const noexcept { return dst_[e]; }
  std::uint16_t edge_action(std::size_t e) const noexcept { return action_[e]; }
  std::size_t edge_count() const noexcept { return dst_.size(); }

  /// BFS level of a state.
  std::uint64_t depth_of(Index i) const {
    return static_cast<std::uint64_t>(std::upper_bound(level_start_.begin(), level_start_.end(), i) -
                                      level_start_.begin()) -
           1;
  }

  std::optional<Index> find(const ControllerState& st) const { return find(codec_.pack(st)); }

  std::optional<Index> find(const PackedState& p) const {
    if (table_.empty())
      return std::nullopt;
    for (std::size_t h = hash(p) & mask_;; h = (h + 1) & mask_) {
      const Index slot = table_[h];
      if (slot == empty_slot)
        return std::nullopt;
      if (equal(slot, p))
        return slot;
    }
  }

  /// Walk log of a random exploration, as action codes from state 0.
  const std::vector<std::uint16_t>& walk() const noexcept { return walk_; }

  /// Edge list of a path of edges as actions.
  std::vector<Action> actions_of(std::span<const std::size_t> edges) const {
    std::vector<Action> out;
    for (std::size_t e : edges)
      out.push_back(controller_->alphabet().decode(action_[e]));
    return out;
  }

private:
  friend class Explorer;
  static constexpr Index empty_slot = 0xffffffffu;

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }
  static std::uint64_t hash(const PackedState& p) { return mix(p.w[0] ^ mix(p.w[1])); }

  bool equal(Index i, const PackedState& p) const {
    for (unsigned k = 0; k < words_; ++k)
      if (keys_[std::size_t{i} * words_ + k] != p.w[k])
        return false;
    return true;
  }

  /// Index of `p`, inserting it if new. Second is true on insertion.
  std::pair<Index, bool> intern(const PackedState& p, ModeTag tag) {
    if ((size() + 1) * 2 > table_.size())
      grow();
    std::size_t h = hash(p) & mask_;
    for (;; h = (h + 1) & mask_) {
      const Index slot = table_[h];
      if (slot == empty_slot)
        break;
      if (equal(slot, p))
        return {slot, false};
    }
    const auto idx = static_cast<Index>(size());
    table_[h] = idx;
    for (unsigned k = 0; k < words_; ++k)
      keys_.push_back(p.w[k]);
    tags_.push_back(static_cast<std::uint8_t>(tag));
    return {idx, true};
  }

  void grow() {
    const std::size_t cap = table_.empty() ? 1024 : table_.size() * 2;
    table_.assign(cap, empty_slot);
    mask_ = cap - 1;
    for (Index i = 0; i < size(); ++i) {
      std::size_t h = hash(packed(i)) & mask_;
      while (table_[h] != empty_slot)
        h = (h + 1) & mask_;
      table_[h] = i;
    }
  }

  const Controller* controller_;
  StateCodec codec_;
  unsigned words_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint8_t> tags_;
  std::vector<Index> table_;
  std::size_t mask_ = 0;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Index> dst_;
  std::vector<std::uint16_t> action_;
  std::vector<Index> level_start_;
  std::vector<std::uint16_t> walk_;
  bool exhaustive_ = false;
  GraphStats stats_;
};

class Explorer {
public:
  explicit Explorer(const Controller& controller) : controller_(controller) {}

  StateGraph explore(const ExploreOptions& opt) const {
    const auto t0 = std::chrono::steady_clock::now();
    StateGraph g(controller_);
    if (opt.mode == ExploreMode::exhaustive && state_bound(controller_.config()) > opt.ceiling)
      throw ExploreLimitError("state bound " + std::to_string(state_bound(controller_.config())) +
                                  " exceeds ceiling " + std::to_string(opt.ceiling),
                              {}, true);
    const ControllerState init = controller_.initial_state();
    g.intern(g.codec_.pack(init), init.tag());
    if (opt.mode == ExploreMode::random)
      random_walk(g, opt);
    else
      bfs(g, opt, t0);
    finish(g, t0);
    return g;
  }

private:
  struct Successor {
    PackedState state;
    std::uint16_t action;
    std::uint8_t tag;
  };

  void expand(const StateCodec& codec, const PackedState& p, std::vector<Successor>& out) const {
    const ControllerState st = codec.unpack(p);
    const Alphabet& alpha = controller_.alphabet();
    auto add = [&](const Action& a) {
      const ControllerState n = controller_.step_unchecked(st, a);
      out.push_back({codec.pack(n), static_cast<std::uint16_t>(alpha.encode_unchecked(a)),
                     static_cast<std::uint8_t>(n.tag())});
    };
    switch (st.tag()) {
    case ModeTag::stable:
      for (const Action& a : controller_.stable_inputs())
        add(a);
      break;
    case ModeTag::awaiting: {
      Action r = controller_.head_read(st);
      const std::size_t n = value_count(info(r.kind).value);
      for (std::size_t v = 0; v < n; ++v) {
        r.value = static_cast<std::uint8_t>(v);
        add(r);
      }
      break;
    }
    case ModeTag::emitting: add(controller_.head_output(st)); break;
    }
  }

  void bfs(StateGraph& g, const ExploreOptions& opt, std::chrono::steady_clock::time_point t0) const {
    const bool bounded = opt.mode == ExploreMode::bounded;
    const unsigned threads = std::max(1u, opt.threads);
    constexpr std::size_t window = 1 << 15;
    std::size_t level_begin = 0;
    std::uint64_t level = 0;
    std::vector<std::vector<Successor>> buffers(window);
    while (level_begin < g.size()) {
      const std::size_t level_end = g.size();
      g.level_start_.push_back(static_cast<StateGraph::Index>(level_begin));
      if (bounded && level >= opt.depth) {
        g.offsets_.resize(level_end + 1, g.dst_.size());
        break;
      }
      for (std::size_t w0 = level_begin; w0 < level_end; w0 += window) {
        const std::size_t w1 = std::min(level_end, w0 + window);
        compute(g, w0, w1, threads, buffers);
        for (std::size_t i = w0; i < w1; ++i) {
          for (const Successor& s : buffers[i - w0]) {
            const auto [idx, fresh] = g.intern(s.state, static_cast<ModeTag>(s.tag));
            (void)fresh;
            g.dst_.push_back(idx);
            g.action_.push_back(s.action);
          }
          g.offsets_.push_back(g.dst_.size());
          if (g.size() > opt.max_states) {
            finish(g, t0);
            throw ExploreLimitError("memory budget of " + std::to_string(opt.max_states) + " states exceeded",
                                    g.stats_, false);
          }
        }
      }
      level_begin = level_end;
      ++level;
    }
    g.exhaustive_ = level_begin == g.size();
  }

  void compute(const StateGraph& g, std::size_t w0, std::size_t w1, unsigned threads,
               std::vector<std::vector<Successor>>& buffers) const {
    auto work = [&](std::size_t i) {
      auto& buf = buffers[i - w0];
      buf.clear();
      expand(g.codec_, g.packed(static_cast<StateGraph::Index>(i)), buf);
    };
    if (threads == 1) {
      for (std::size_t i = w0; i < w1; ++i)
        work(i);
      return;
    }
    std::atomic<std::size_t> next{w0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(64)) < w1;)
          for (std::size_t j = i; j < std::min(w1, i + 64); ++j)
            work(j);
      });
    for (auto& th : pool)
      th.join();
  }

  void random_walk(StateGraph& g, const ExploreOptions& opt) const {
    std::mt19937_64 rng(opt.seed);
    std::vector<Successor> succ;
    StateGraph::Index cur = 0;
    // Edges are recorded per visited state in the order first traversed;
    // the CSR layout is built afterwards.
    std::vector<std::vector<std::pair<StateGraph::Index, std::uint16_t>>> out(1);
    g.level_start_.push_back(0);
    for (std::uint64_t step = 0; step < opt.steps; ++step) {
      succ.clear();
      expand(g.codec_, g.packed(cur), succ);
      const Successor& s = succ[rng() % succ.size()];
      const auto [idx, fresh] = g.intern(s.state, static_cast<ModeTag>(s.tag));
      if (fresh)
        out.emplace_back();
      auto& edges = out[cur];
      const std::pair<StateGraph::Index, std::uint16_t> edge{idx, s.action};
      if (std::find(edges.begin(), edges.end(), edge) == edges.end())
        edges.push_back(edge);
      g.walk_.push_back(s.action);
      cur = idx;
    }
    for (auto& edges : out) {
      std::sort(edges.begin(), edges.end(), [](auto& a, auto& b) { return a.second < b.second; });
      for (auto [d, a] : edges) {
        g.dst_.push_back(d);
        g.action_.push_back(a);
      }
      g.offsets_.push_back(g.dst_.size());
    }
  }

  static void finish(StateGraph& g, std::chrono::steady_clock::time_point t0) {
    g.stats_.states = g.size();
    g.stats_.stable_states = static_cast<std::uint64_t>(std::count(g.tags_.begin(), g.tags_.end(), 0));
    g.stats_.edges = g.dst_.size();
    g.stats_.depth = g.level_start_.empty() ? 0 : g.level_start_.size() - 1;
    g.stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  const Controller& controller_;
};

inline StateGraph explore(const Controller& controller, const ExploreOptions& opt) {
  return Explorer(controller).explore(opt);
}

} // namespace marijke
