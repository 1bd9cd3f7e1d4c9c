#pragma once

// Trace monitors.
//
// Safety and causality requirements share one shape: after an `a`, a `c`
// may only happen once a `b` has intervened (optionally also from the very
// start of the trace). Pattern variables are expanded into one binding per
// configured instance and compiled into per-action bitsets.
//
// Operator requirements are obligations: when a trigger input arrives and a
// condition over observation variables holds, every obligation output must
// occur before the next stable input, unless a suppression action occurs
// first.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "marijke/domain.hpp"

namespace marijke {

// ---------------------------------------------------------------------------
// Action predicates

/// Values of the pattern variables of one binding.
using Binding = std::array<std::uint8_t, 4>;

struct ArgSpec {
  enum class Kind : std::uint8_t { any, mask, var, opposite_var };
  Kind kind = Kind::any;
  std::uint32_t mask = 0;
  std::uint8_t var = 0;

  static ArgSpec anything() { return {}; }
  template <class E>
  static ArgSpec is(E v) {
    return {Kind::mask, 1u << to_u8(v), 0};
  }
  template <class E>
  static ArgSpec in(std::initializer_list<E> vs) {
    ArgSpec a{Kind::mask, 0, 0};
    for (E v : vs)
      a.mask |= 1u << to_u8(v);
    return a;
  }
  /// Every value except the listed ones.
  template <class E>
  static ArgSpec not_in(std::initializer_list<E> vs) {
    ArgSpec a = in(vs);
    a.mask = ~a.mask;
    return a;
  }
  static ArgSpec bound(std::uint8_t var) { return {Kind::var, 0, var}; }
  static ArgSpec opposite_of(std::uint8_t var) { return {Kind::opposite_var, 0, var}; }

  bool matches(std::uint8_t x, const Binding& b) const {
    switch (kind) {
    case Kind::any: return true;
    case Kind::mask: return (mask >> x) & 1u;
    case Kind::var: return b[var] == x;
    case Kind::opposite_var: return b[var] != x;
    }
    return false;
  }
  bool uses(std::uint8_t v) const { return (kind == Kind::var || kind == Kind::opposite_var) && var == v; }
};

/// One action kind with a constraint per argument slot.
struct Atom {
  ActionKind kind = ActionKind::skip;
  ArgSpec lock, side, orientation, value;

  Atom with_lock(ArgSpec a) const {
    Atom r = *this;
    r.lock = a;
    return r;
  }
  Atom with_side(ArgSpec a) const {
    Atom r = *this;
    r.side = a;
    return r;
  }
  Atom with_orientation(ArgSpec a) const {
    Atom r = *this;
    r.orientation = a;
    return r;
  }
  Atom with_value(ArgSpec a) const {
    Atom r = *this;
    r.value = a;
    return r;
  }

  bool matches(const Action& x, const Binding& b) const {
    return x.kind == kind && lock.matches(to_u8(x.lock), b) && side.matches(to_u8(x.side), b) &&
           orientation.matches(to_u8(x.orientation), b) && value.matches(x.value, b);
  }
  bool uses(std::uint8_t v) const { return lock.uses(v) || side.uses(v) || orientation.uses(v) || value.uses(v); }
};

inline Atom on(ActionKind k) { return Atom{k, {}, {}, {}, {}}; }

/// Disjunction of atoms; the empty predicate matches nothing.
struct ActionPredicate {
  std::vector<Atom> any_of;

  ActionPredicate() = default;
  ActionPredicate(Atom a) : any_of{a} {}
  ActionPredicate(std::initializer_list<Atom> as) : any_of(as) {}

  bool matches(const Action& x, const Binding& b = {}) const {
    for (const Atom& a : any_of)
      if (a.matches(x, b))
        return true;
    return false;
  }
  bool uses(std::uint8_t v) const {
    for (const Atom& a : any_of)
      if (a.uses(v))
        return true;
    return false;
  }
  bool empty() const { return any_of.empty(); }

  friend ActionPredicate operator|(ActionPredicate l, const ActionPredicate& r) {
    l.any_of.insert(l.any_of.end(), r.any_of.begin(), r.any_of.end());
    return l;
  }
};

// ---------------------------------------------------------------------------
// Safety patterns

struct Variable {
  enum class Slot : std::uint8_t { lock, side, orientation, value };
  std::string name;
  Slot slot = Slot::lock;
  ValueType type = ValueType::none; ///< for value variables
  std::vector<std::uint8_t> values; ///< domain under the active configuration

  std::string label(std::uint8_t v) const {
    switch (slot) {
    case Slot::lock: return std::string(name_of(static_cast<LockId>(v)));
    case Slot::side: return std::string(name_of(static_cast<StreamSide>(v)));
    case Slot::orientation: return std::string(name_of(static_cast<Orientation>(v)));
    case Slot::value: return std::string(value_names(type)[v]);
    }
    return {};
  }

private:
  template <class E>
  static std::string_view name_of(E e) {
    return marijke::name(e);
  }
};

struct SafetyPattern {
  std::vector<Variable> vars;
  ActionPredicate a, b, c;
  bool initial_clause = false;
};

/// Compiled pattern: for each action code, which bindings it arms (a),
/// disarms (b) and trips (c).
class MonitorAutomaton {
public:
  MonitorAutomaton(const SafetyPattern& p, const Alphabet& alphabet) : alphabet_(&alphabet) {
    if (p.vars.size() > std::tuple_size_v<Binding>)
      throw Error("pattern has too many variables");
    for (std::uint8_t v = 0; v < p.vars.size(); ++v)
      if ((p.b.uses(v) || p.c.uses(v)) && !p.a.uses(v))
        throw Error("pattern variable '" + p.vars[v].name + "' is used in b or c but not bound by a");
    enumerate(p.vars, 0, Binding{});
    words_ = (bindings_.size() + 63) / 64;
    const std::size_t n = alphabet.size();
    gen_.assign(n * words_, 0);
    kill_.assign(n * words_, 0);
    trip_.assign(n * words_, 0);
    initial_.assign(words_, 0);
    for (std::size_t k = 0; k < bindings_.size(); ++k) {
      const std::uint64_t bit = std::uint64_t{1} << (k % 64);
      const std::size_t w = k / 64;
      if (p.initial_clause)
        initial_[w] |= bit;
      for (std::uint32_t code = 0; code < n; ++code) {
        const Action& x = alphabet.decode(code);
        if (p.a.matches(x, bindings_[k]))
          gen_[code * words_ + w] |= bit;
        if (p.b.matches(x, bindings_[k]))
          kill_[code * words_ + w] |= bit;
        if (p.c.matches(x, bindings_[k]))
          trip_[code * words_ + w] |= bit;
      }
    }
    vars_ = p.vars;
  }

  std::size_t words() const noexcept { return words_; }
  std::size_t binding_count() const noexcept { return bindings_.size(); }
  const Binding& binding(std::size_t k) const { return bindings_[k]; }
  const std::vector<Variable>& vars() const noexcept { return vars_; }
  const Alphabet& alphabet() const noexcept { return *alphabet_; }

  const std::uint64_t* gen(std::uint32_t code) const { return &gen_[code * words_]; }
  const std::uint64_t* kill(std::uint32_t code) const { return &kill_[code * words_]; }
  const std::uint64_t* trip(std::uint32_t code) const { return &trip_[code * words_]; }
  const std::vector<std::uint64_t>& initial() const noexcept { return initial_; }

  /// Human-readable binding: values of the variables in order.
  std::string describe(std::size_t k) const { return describe_binding(vars_, bindings_[k]); }

  static std::string describe_binding(const std::vector<Variable>& vars, const Binding& b) {
    std::string out;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (v)
        out += ',';
      out += vars[v].name + "=" + vars[v].label(b[v]);
    }
    return out.empty() ? "-" : out;
  }

private:
  void enumerate(const std::vector<Variable>& vars, std::size_t i, Binding b) {
    if (i == vars.size()) {
      bindings_.push_back(b);
      return;
    }
    for (std::uint8_t v : vars[i].values) {
      b[i] = v;
      enumerate(vars, i + 1, b);
    }
  }

  const Alphabet* alphabet_;
  std::vector<Variable> vars_;
  std::vector<Binding> bindings_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> gen_, kill_, trip_, initial_;
};

struct MonitorState {
  std::vector<std::uint64_t> armed;
  bool violated = false;
  std::uint64_t witness = 0;   ///< trace index of the violating action
  std::size_t binding = 0;     ///< violated binding
};

inline MonitorState start(const MonitorAutomaton& m) { return {m.initial(), false, 0, 0}; }

/// One monitor step. `index` is the trace position of `code`.
inline void advance(const MonitorAutomaton& m, MonitorState& s, std::uint32_t code, std::uint64_t index) {
  if (s.violated)
    return;
  const std::uint64_t* gen = m.gen(code);
  const std::uint64_t* kill = m.kill(code);
  const std::uint64_t* trip = m.trip(code);
  for (std::size_t w = 0; w < m.words(); ++w) {
    if (const std::uint64_t hit = s.armed[w] & trip[w]) {
      s.violated = true;
      s.witness = index;
      s.binding = w * 64 + static_cast<std::size_t>(__builtin_ctzll(hit));
      return;
    }
  }
  for (std::size_t w = 0; w < m.words(); ++w)
    s.armed[w] = gen[w] | (s.armed[w] & ~kill[w]);
}

// ---------------------------------------------------------------------------
// Observation expressions

/// Expression over small unsigned observation variables.
class Expr {
public:
  enum class Op : std::uint8_t { constant, var, in, not_, and_, or_, ite };

  static Expr constant(std::uint8_t v) { return Expr(Op::constant, v, 0); }
  static Expr truth() { return constant(1); }
  static Expr var(std::uint8_t v) { return Expr(Op::var, v, 0); }
  static Expr eq(std::uint8_t v, std::uint8_t value) { return Expr(Op::in, v, 1u << value); }
  static Expr in(std::uint8_t v, std::initializer_list<std::uint8_t> values) {
    std::uint32_t mask = 0;
    for (auto x : values)
      mask |= 1u << x;
    return Expr(Op::in, v, mask);
  }
  static Expr ite(Expr c, Expr t, Expr e) {
    Expr r(Op::ite, 0, 0);
    r.kids_ = std::make_shared<std::vector<Expr>>(std::vector<Expr>{std::move(c), std::move(t), std::move(e)});
    return r;
  }
  friend Expr operator!(Expr e) {
    Expr r(Op::not_, 0, 0);
    r.kids_ = std::make_shared<std::vector<Expr>>(std::vector<Expr>{std::move(e)});
    return r;
  }
  friend Expr operator&&(Expr l, Expr r) { return join(Op::and_, std::move(l), std::move(r)); }
  friend Expr operator||(Expr l, Expr r) { return join(Op::or_, std::move(l), std::move(r)); }

  std::uint8_t eval(const std::uint8_t* vals) const {
    switch (op_) {
    case Op::constant: return arg_;
    case Op::var: return vals[arg_];
    case Op::in: return (mask_ >> vals[arg_]) & 1u;
    case Op::not_: return !(*kids_)[0].eval(vals);
    case Op::and_:
      for (const Expr& k : *kids_)
        if (!k.eval(vals))
          return 0;
      return 1;
    case Op::or_:
      for (const Expr& k : *kids_)
        if (k.eval(vals))
          return 1;
      return 0;
    case Op::ite: return (*kids_)[0].eval(vals) ? (*kids_)[1].eval(vals) : (*kids_)[2].eval(vals);
    }
    return 0;
  }

private:
  Expr(Op op, std::uint8_t arg, std::uint32_t mask) : op_(op), arg_(arg), mask_(mask) {}

  static Expr join(Op op, Expr l, Expr r) {
    Expr out(op, 0, 0);
    out.kids_ = std::make_shared<std::vector<Expr>>();
    for (Expr* e : {&l, &r}) {
      if (e->op_ == op)
        out.kids_->insert(out.kids_->end(), e->kids_->begin(), e->kids_->end());
      else
        out.kids_->push_back(std::move(*e));
    }
    return out;
  }

  Op op_;
  std::uint8_t arg_;
  std::uint32_t mask_;
  std::shared_ptr<std::vector<Expr>> kids_;
};

// ---------------------------------------------------------------------------
// Obligation specifications

struct ObsVar {
  std::string name;
  std::uint8_t initial = 0;
};

struct Assign {
  std::uint8_t var;
  Expr value;
};

struct UpdateRule {
  ActionPredicate when;
  std::vector<Assign> assigns; ///< simultaneous, evaluated on the old values
};

struct ObligationSpec {
  std::string label; ///< which instance of the requirement this is
  std::vector<ObsVar> vars;
  std::vector<UpdateRule> updates;
  ActionPredicate trigger;
  Expr condition = Expr::truth(); ///< evaluated before the trigger's own update
  std::vector<ActionPredicate> obligations;
  ActionPredicate suppress;
};

/// Per-action lookup tables of an ObligationSpec.
class ObligationAutomaton {
public:
  ObligationAutomaton(ObligationSpec spec, const Alphabet& alphabet) : spec_(std::move(spec)) {
    if (spec_.obligations.size() > 32)
      throw Error("too many obligations in " + spec_.label);
    if (spec_.vars.size() > 32)
      throw Error("too many observation variables in " + spec_.label);
    const std::size_t n = alphabet.size();
    info_.resize(n);
    updates_.resize(n);
    for (std::uint32_t code = 0; code < n; ++code) {
      const Action& x = alphabet.decode(code);
      Info& i = info_[code];
      i.trigger = spec_.trigger.matches(x);
      i.suppress = spec_.suppress.matches(x);
      i.boundary = x.is_stable_input();
      for (std::size_t k = 0; k < spec_.obligations.size(); ++k)
        if (spec_.obligations[k].matches(x))
          i.discharges |= 1u << k;
      for (const UpdateRule& r : spec_.updates)
        if (r.when.matches(x))
          for (const Assign& as : r.assigns)
            updates_[code].push_back(as);
      if (updates_[code].size() > 32)
        throw Error("too many simultaneous assignments in " + spec_.label);
      i.updates = !updates_[code].empty();
    }
    initial_.resize(spec_.vars.size());
    for (std::size_t v = 0; v < spec_.vars.size(); ++v)
      initial_[v] = spec_.vars[v].initial;
    all_ = spec_.obligations.size() == 32 ? 0xffffffffu : (1u << spec_.obligations.size()) - 1;
  }

  struct Info {
    bool trigger = false;
    bool suppress = false;
    bool boundary = false;
    bool updates = false;
    std::uint32_t discharges = 0;
  };

  const ObligationSpec& spec() const noexcept { return spec_; }
  const Info& info(std::uint32_t code) const { return info_[code]; }
  std::uint32_t all_obligations() const noexcept { return all_; }
  const std::vector<std::uint8_t>& initial() const noexcept { return initial_; }

  /// Applies the simultaneous update of `code` to `vals` in place.
  void update(std::uint32_t code, std::uint8_t* vals) const {
    const auto& as = updates_[code];
    if (as.empty())
      return;
    std::array<std::uint8_t, 32> next{};
    for (std::size_t k = 0; k < as.size(); ++k)
      next[k] = as[k].value.eval(vals);
    for (std::size_t k = 0; k < as.size(); ++k)
      vals[as[k].var] = next[k];
  }

  bool condition(const std::uint8_t* vals) const { return spec_.condition.eval(vals); }

  /// Packs a valuation at 2 bits per variable.
  static std::uint64_t pack(const std::uint8_t* vals, std::size_t n) {
    std::uint64_t out = 0;
    for (std::size_t v = 0; v < n; ++v)
      out |= std::uint64_t{vals[v]} << (2 * v);
    return out;
  }
  static void unpack(std::uint64_t packed, std::uint8_t* vals, std::size_t n) {
    for (std::size_t v = 0; v < n; ++v)
      vals[v] = static_cast<std::uint8_t>((packed >> (2 * v)) & 3u);
  }

private:
  ObligationSpec spec_;
  std::vector<Info> info_;
  std::vector<std::vector<Assign>> updates_;
  std::vector<std::uint8_t> initial_;
  std::uint32_t all_ = 0;
};

/// Runs one ObligationAutomaton over a trace.
class ObligationMonitor {
public:
  explicit ObligationMonitor(const ObligationAutomaton& m) : m_(&m), vals_(m.initial()) {}

  bool violated() const noexcept { return violated_; }
  std::uint64_t witness() const noexcept { return witness_; }
  std::uint64_t triggered() const noexcept { return triggered_; }
  const std::vector<std::uint8_t>& values() const noexcept { return vals_; }

  void advance(std::uint32_t code, std::uint64_t index) {
    if (violated_)
      return;
    const auto& i = m_->info(code);
    if (i.boundary) {
      if (active_ && pending_) {
        violated_ = true;
        witness_ = trigger_index_;
        return;
      }
      active_ = false;
      if (i.trigger && m_->condition(vals_.data())) {
        active_ = true;
        pending_ = m_->all_obligations();
        trigger_index_ = index;
        ++triggered_;
      }
    } else if (active_) {
      if (i.suppress)
        active_ = false;
      else
        pending_ &= ~i.discharges;
    }
    if (i.updates)
      m_->update(code, vals_.data());
  }

  /// Whether an obligation is still open (only meaningful mid-burst).
  bool pending() const noexcept { return active_ && pending_; }

private:
  const ObligationAutomaton* m_;
  std::vector<std::uint8_t> vals_;
  bool active_ = false;
  std::uint32_t pending_ = 0;
  std::uint64_t trigger_index_ = 0;
  std::uint64_t triggered_ = 0;
  bool violated_ = false;
  std::uint64_t witness_ = 0;
};

} // namespace marijke
