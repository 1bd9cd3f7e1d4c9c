#pragma once

// The 53 requirements: safety and causality as a-b-c patterns, operator
// commands as obligations, liveness as graph games (with trace obligations
// for the emergency cases).

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "marijke/checker.hpp"

namespace marijke {

enum class Category : std::uint8_t { safety, causality, operator_command, liveness };

inline std::string_view name(Category c) {
  static constexpr std::array<std::string_view, 4> names{"safety", "causality", "operator", "liveness"};
  return names[to_u8(c)];
}

struct Requirement {
  std::string id;
  std::string title;
  Category category;
  int number; ///< position in the listing, 1-based
  std::function<std::vector<SafetyPattern>(const PlantConfig&)> patterns;
  std::function<std::vector<ObligationSpec>(const PlantConfig&)> obligations;
  std::function<std::vector<LivenessSpec>(const PlantConfig&)> liveness;

  bool has_patterns() const { return static_cast<bool>(patterns); }
  bool has_obligations() const { return static_cast<bool>(obligations); }
  bool has_liveness() const { return static_cast<bool>(liveness); }
};

namespace catalog_detail {

using K = ActionKind;
using A = ArgSpec;
using Slot = Variable::Slot;
using SP = SensorPosition;
using AC = ActuatorCommand;
using DL = DoubleLight;
using SL = SingleLight;
using DLS = DoubleLightStatus;
using SLS = SingleLightStatus;

constexpr std::uint8_t L = 0, S = 1, O = 2;

inline Variable lock_var(const PlantConfig& c) {
  Variable v{"l", Slot::lock, ValueType::none, {}};
  for (LockId l : c.locks)
    v.values.push_back(to_u8(l));
  return v;
}
inline Variable side_var() { return {"s", Slot::side, ValueType::none, {0, 1}}; }
inline Variable orient_var(const PlantConfig& c) {
  Variable v{"o", Slot::orientation, ValueType::none, {}};
  for (Orientation o : c.orientations)
    v.values.push_back(to_u8(o));
  return v;
}
inline Variable barrier_orient_var() { return {"o", Slot::orientation, ValueType::none, {0, 1}}; }
/// Atom on a lock device bound to (l, s, o).
inline Atom dev(K k) { return on(k).with_lock(A::bound(L)).with_side(A::bound(S)).with_orientation(A::bound(O)); }
/// Atom on a lock pair bound to (l, s), any orientation.
inline Atom pair(K k) { return on(k).with_lock(A::bound(L)).with_side(A::bound(S)); }

inline ActionPredicate outputs() {
  return {on(K::gate_actuator),           on(K::paddle_actuator),          on(K::barrier_actuator),
          on(K::entering_light_actuator), on(K::leaving_light_actuator),   on(K::barrier_light_actuator)};
}
inline ActionPredicate all_reads() {
  return {on(K::entering_light_sensor), on(K::leaving_light_sensor), on(K::barrier_light_sensor)};
}

// ---------------------------------------------------------------------------
// Safety

inline SafetyPattern opposing(const PlantConfig& c, K sensor, K actuator, K other) {
  SafetyPattern p;
  p.vars = {lock_var(c), side_var(), orient_var(c)};
  p.a = ActionPredicate{dev(sensor).with_value(A::in({SP::sense_open, SP::sense_intermediate, SP::fail_position})),
                        dev(actuator).with_value(A::is(AC::do_open))};
  p.b = dev(sensor).with_value(A::is(SP::sense_closed));
  p.c = on(other).with_lock(A::bound(L)).with_side(A::opposite_of(S)).with_value(A::is(AC::do_open));
  return p;
}

inline SafetyPattern endstop(const PlantConfig& c, K sensor, K actuator, bool opening) {
  SafetyPattern p;
  p.vars = {lock_var(c), side_var(), orient_var(c)};
  const SP end = opening ? SP::sense_open : SP::sense_closed;
  const SP other = opening ? SP::sense_closed : SP::sense_open;
  p.a = dev(sensor).with_value(A::in({other, SP::sense_intermediate, SP::fail_position}));
  p.b = dev(sensor).with_value(A::is(end));
  p.c = dev(actuator).with_value(A::is(opening ? AC::do_endStopOpening : AC::do_endStopClosing));
  p.initial_clause = true;
  return p;
}

inline SafetyPattern barrier_endstop(bool opening) {
  SafetyPattern p;
  const SP end = opening ? SP::sense_open : SP::sense_closed;
  const SP other = opening ? SP::sense_closed : SP::sense_open;
  p.a = on(K::barrier_sensor).with_value(A::in({other, SP::sense_intermediate, SP::fail_position}));
  p.b = on(K::barrier_sensor).with_value(A::is(end));
  p.c = on(K::barrier_actuator).with_value(A::is(opening ? AC::do_endStopOpening : AC::do_endStopClosing));
  p.initial_clause = true;
  return p;
}

inline std::vector<SafetyPattern> safreq5(const PlantConfig& c) {
  SafetyPattern p;
  p.vars = {lock_var(c), side_var()};
  p.a = pair(K::water_sensor).with_value(A::in({WaterLevel::unequal, WaterLevel::fail_water_sensor}));
  p.b = pair(K::water_sensor).with_value(A::is(WaterLevel::equal));
  p.c = pair(K::gate_actuator).with_value(A::is(AC::do_open));
  p.initial_clause = true;
  return {p};
}

inline std::vector<SafetyPattern> safreq6(const PlantConfig& c) {
  SafetyPattern p1;
  p1.vars = {lock_var(c), side_var(), orient_var(c)};
  p1.a = ActionPredicate{dev(K::leaving_light_sensor).with_value(A::in({SLS::show_green, SLS::fail_single})),
                         dev(K::leaving_light_actuator)};
  p1.b = dev(K::leaving_light_sensor).with_value(A::is(SLS::show_red));
  p1.c = pair(K::entering_light_actuator).with_value(A::is(DL::single_green));
  p1.initial_clause = true;
  SafetyPattern p2;
  p2.vars = {lock_var(c), side_var()};
  p2.a = pair(K::entering_light_actuator).with_value(A::is(DL::single_green));
  p2.b = pair(K::entering_light_actuator).with_value(A::not_in({DL::single_green}));
  p2.c = pair(K::leaving_light_actuator).with_value(A::is(SL::green));
  return {p1, p2};
}

inline std::vector<SafetyPattern> safreq13(const PlantConfig& c) {
  SafetyPattern p1;
  p1.vars = {lock_var(c), side_var(), orient_var(c)};
  p1.a = ActionPredicate{
      dev(K::entering_light_sensor).with_value(A::not_in({DLS::show_single_red, DLS::show_redred})),
      dev(K::entering_light_actuator)};
  p1.b = dev(K::entering_light_sensor).with_value(A::in({DLS::show_single_red, DLS::show_redred}));
  p1.c = pair(K::leaving_light_actuator).with_value(A::is(SL::green));
  p1.initial_clause = true;
  SafetyPattern p2;
  p2.vars = {lock_var(c), side_var()};
  p2.a = pair(K::leaving_light_actuator).with_value(A::is(SL::green));
  p2.b = pair(K::leaving_light_actuator).with_value(A::is(SL::red));
  p2.c = pair(K::entering_light_actuator).with_value(A::in({DL::single_green, DL::redgreen}));
  return {p1, p2};
}

inline SafetyPattern green_needs_open_gate(const PlantConfig& c, Atom green) {
  SafetyPattern p;
  p.vars = {lock_var(c), side_var(), orient_var(c)};
  p.a = ActionPredicate{
      dev(K::gate_sensor).with_value(A::in({SP::sense_closed, SP::sense_intermediate, SP::fail_position})),
      dev(K::gate_actuator).with_value(A::in({AC::do_open, AC::do_close}))};
  p.b = dev(K::gate_sensor).with_value(A::is(SP::sense_open));
  p.c = green;
  p.initial_clause = true;
  return p;
}

inline SafetyPattern close_needs_red(const PlantConfig& c, ActionPredicate green, ActionPredicate red) {
  SafetyPattern p;
  p.vars = {lock_var(c), side_var(), orient_var(c)};
  p.a = std::move(green);
  p.b = std::move(red);
  p.c = pair(K::gate_actuator).with_value(A::is(AC::do_close));
  return p;
}

inline std::vector<SafetyPattern> safreq10(const PlantConfig& c) {
  SafetyPattern p;
  p.vars = {lock_var(c)};
  p.a = on(K::emergency_lock_command).with_lock(A::bound(L)).with_value(A::is(EmergencyCommand::activate));
  p.b = on(K::emergency_lock_command).with_lock(A::bound(L)).with_value(A::is(EmergencyCommand::deactivate));
  p.c = ActionPredicate{
      on(K::gate_actuator).with_lock(A::bound(L)).with_value(A::in({AC::do_open, AC::do_close})),
      on(K::paddle_actuator).with_lock(A::bound(L)).with_value(A::in({AC::do_open, AC::do_close}))};
  return {p};
}

inline std::vector<SafetyPattern> safreq29(const PlantConfig&) {
  SafetyPattern p;
  p.vars = {side_var(), barrier_orient_var()};
  auto light = on(K::barrier_light_actuator).with_side(A::bound(0)).with_orientation(A::bound(1));
  p.a = light.with_value(A::is(SL::green));
  p.b = light.with_value(A::is(SL::red));
  p.c = on(K::barrier_actuator).with_value(A::in({AC::do_open, AC::do_close}));
  return {p};
}

inline std::vector<SafetyPattern> safreq30(const PlantConfig&) {
  SafetyPattern p;
  p.a = ActionPredicate{
      on(K::barrier_sensor).with_value(A::in({SP::sense_closed, SP::sense_intermediate, SP::fail_position})),
      on(K::barrier_actuator).with_value(A::in({AC::do_open, AC::do_close}))};
  p.b = on(K::barrier_sensor).with_value(A::is(SP::sense_open));
  p.c = on(K::barrier_light_actuator).with_value(A::is(SL::green));
  return {p};
}

inline std::vector<SafetyPattern> safreq40(const PlantConfig&) {
  SafetyPattern p;
  p.a = on(K::emergency_barrier_command).with_value(A::is(EmergencyCommand::activate));
  p.b = on(K::emergency_barrier_command).with_value(A::is(EmergencyCommand::deactivate));
  p.c = on(K::barrier_actuator).with_value(A::in({AC::do_open, AC::do_close}));
  return {p};
}

// ---------------------------------------------------------------------------
// Causality

/// An actuator command to a device needs an enabling command in between.
inline SafetyPattern caused(std::vector<Variable> vars, Atom device, ActionPredicate enabling, Atom effect) {
  SafetyPattern p;
  p.vars = std::move(vars);
  p.a = device;
  p.b = std::move(enabling);
  p.c = effect;
  p.initial_clause = true;
  return p;
}

inline Atom lock_emergency_on() {
  return on(K::emergency_lock_command).with_lock(A::bound(L)).with_value(A::is(EmergencyCommand::activate));
}
inline Atom console(K k, ConsoleCommand cmd) { return pair(k).with_value(A::is(cmd)); }

inline std::vector<SafetyPattern> device_command(const PlantConfig& c, K command, K actuator, ConsoleCommand cmd,
                                                 AC effect, bool emergency) {
  ActionPredicate enabling = console(command, cmd);
  if (emergency)
    enabling = enabling | lock_emergency_on();
  return {caused({lock_var(c), side_var(), orient_var(c)}, dev(actuator), enabling,
                 dev(actuator).with_value(A::is(effect)))};
}

inline std::vector<SafetyPattern> causreq19(const PlantConfig& c) {
  const Atom ea = dev(K::entering_light_actuator);
  const Atom cmd = pair(K::entering_light_command);
  std::vector<Variable> vars{lock_var(c), side_var(), orient_var(c)};
  return {
      caused(vars, ea, cmd.with_value(A::is(DL::single_green)), ea.with_value(A::is(DL::single_green))),
      caused(vars, ea, cmd.with_value(A::is(DL::redgreen)), ea.with_value(A::is(DL::redgreen))),
      caused(vars, ea,
             ActionPredicate{cmd.with_value(A::is(DL::single_red)), lock_emergency_on(),
                             console(K::gate_command, ConsoleCommand::command_stop)},
             ea.with_value(A::is(DL::single_red))),
      caused(vars, ea, ActionPredicate{cmd.with_value(A::is(DL::redred)), lock_emergency_on()},
             ea.with_value(A::is(DL::redred))),
  };
}

inline std::vector<SafetyPattern> causreq20(const PlantConfig& c) {
  std::vector<Variable> vars{lock_var(c), side_var(), orient_var(c)};
  const Atom la = dev(K::leaving_light_actuator);
  const Atom cmd = pair(K::leaving_light_command);
  return {
      caused(vars, la, cmd.with_value(A::is(SL::green)), la.with_value(A::is(SL::green))),
      caused(vars, la,
             ActionPredicate{cmd.with_value(A::is(SL::red)), lock_emergency_on(),
                             console(K::gate_command, ConsoleCommand::command_stop)},
             la.with_value(A::is(SL::red))),
  };
}

inline std::vector<SafetyPattern> causreq31(const PlantConfig&) {
  std::vector<Variable> vars{{"s", Slot::side, ValueType::none, {0, 1}}, barrier_orient_var()};
  const Atom bta = on(K::barrier_light_actuator).with_side(A::bound(0)).with_orientation(A::bound(1));
  const Atom cmd = on(K::barrier_light_command).with_side(A::bound(0));
  return {
      caused(vars, bta, cmd.with_value(A::is(SL::green)), bta.with_value(A::is(SL::green))),
      caused(vars, bta,
             ActionPredicate{cmd.with_value(A::is(SL::red)),
                             on(K::emergency_barrier_command).with_value(A::is(EmergencyCommand::activate)),
                             on(K::barrier_command).with_value(A::is(ConsoleCommand::command_stop))},
             bta.with_value(A::is(SL::red))),
  };
}

inline std::vector<SafetyPattern> barrier_caused(ActionPredicate enabling, AC effect) {
  return {caused({}, on(K::barrier_actuator), std::move(enabling),
                 on(K::barrier_actuator).with_value(A::is(effect)))};
}

// ---------------------------------------------------------------------------
// Obligations

/// Builds an ObligationSpec, creating shadow observation variables on
/// demand. Position shadows follow the controller's own bookkeeping, driven
/// by actuator outputs and sensor inputs.
class SpecBuilder {
public:
  SpecBuilder(const PlantConfig& c, std::string label) : c_(c) { spec_.label = std::move(label); }

  ObligationSpec done() { return std::move(spec_); }
  ObligationSpec& spec() { return spec_; }
  const PlantConfig& config() const { return c_; }

  std::uint8_t gate(LockId l, StreamSide s, Orientation o) {
    return position("gate", K::gate_actuator, K::gate_sensor, l, s, o, Position::closed);
  }
  std::uint8_t paddle(LockId l, StreamSide s, Orientation o) {
    return position("paddle", K::paddle_actuator, K::paddle_sensor, l, s, o, Position::closed);
  }
  std::uint8_t barrier() {
    return position("barrier", K::barrier_actuator, K::barrier_sensor, LockId::north, StreamSide::upstream,
                    Orientation::east, Position::opened);
  }

  /// Entering set-point of (l, s) as last emitted.
  std::uint8_t entering(LockId l, StreamSide s) {
    const std::string key = "entering" + suffix(l, s);
    if (auto it = vars_.find(key); it != vars_.end())
      return it->second;
    const std::uint8_t v = add(key, to_u8(DL::single_red));
    for (DL x : {DL::single_red, DL::single_green, DL::redred, DL::redgreen})
      rule(at(K::entering_light_actuator, l, s).with_value(A::is(x)), v, Expr::constant(to_u8(x)));
    return v;
  }
  Expr entering_red(LockId l, StreamSide s) {
    return Expr::in(entering(l, s), {to_u8(DL::single_red), to_u8(DL::redred)});
  }
  Expr leaving_red(LockId l, StreamSide s) {
    const std::string key = "leaving" + suffix(l, s);
    auto it = vars_.find(key);
    std::uint8_t v;
    if (it != vars_.end()) {
      v = it->second;
    } else {
      v = add(key, to_u8(SL::red));
      for (SL x : {SL::red, SL::green})
        rule(at(K::leaving_light_actuator, l, s).with_value(A::is(x)), v, Expr::constant(to_u8(x)));
    }
    return Expr::eq(v, to_u8(SL::red));
  }
  Expr water(LockId l, StreamSide s) {
    const std::string key = "water" + suffix(l, s);
    auto it = vars_.find(key);
    std::uint8_t v;
    if (it != vars_.end()) {
      v = it->second;
    } else {
      v = add(key, 0);
      rule(at(K::water_sensor, l, s).with_value(A::is(WaterLevel::equal)), v, Expr::constant(1));
      rule(at(K::water_sensor, l, s).with_value(A::in({WaterLevel::unequal, WaterLevel::fail_water_sensor})), v,
           Expr::constant(0));
    }
    return Expr::eq(v, 1);
  }
  Expr emergency(LockId l) {
    const std::string key = "emergency_" + std::string(name(l));
    auto it = vars_.find(key);
    std::uint8_t v;
    if (it != vars_.end()) {
      v = it->second;
    } else {
      v = add(key, 0);
      auto cmd = on(K::emergency_lock_command).with_lock(A::is(l));
      rule(cmd.with_value(A::is(EmergencyCommand::activate)), v, Expr::constant(1));
      rule(cmd.with_value(A::is(EmergencyCommand::deactivate)), v, Expr::constant(0));
    }
    return Expr::eq(v, 1);
  }
  Expr barrier_emergency() {
    auto it = vars_.find("barrier_emergency");
    std::uint8_t v;
    if (it != vars_.end()) {
      v = it->second;
    } else {
      v = add("barrier_emergency", 0);
      auto cmd = on(K::emergency_barrier_command);
      rule(cmd.with_value(A::is(EmergencyCommand::activate)), v, Expr::constant(1));
      rule(cmd.with_value(A::is(EmergencyCommand::deactivate)), v, Expr::constant(0));
    }
    return Expr::eq(v, 1);
  }
  Expr barrier_red(StreamSide s) {
    const std::string key = "barrier_light_" + std::string(name(s));
    auto it = vars_.find(key);
    std::uint8_t v;
    if (it != vars_.end()) {
      v = it->second;
    } else {
      v = add(key, to_u8(SL::red));
      for (SL x : {SL::red, SL::green})
        rule(on(K::barrier_light_actuator).with_side(A::is(s)).with_value(A::is(x)), v, Expr::constant(to_u8(x)));
    }
    return Expr::eq(v, to_u8(SL::red));
  }

  /// Every configured gate and paddle on side s of lock l is closed.
  Expr side_closed(LockId l, StreamSide s) {
    Expr e = Expr::truth();
    for (Orientation o : c_.orientations)
      e = e && Expr::eq(gate(l, s, o), to_u8(Position::closed)) && Expr::eq(paddle(l, s, o), to_u8(Position::closed));
    return e;
  }
  Expr gates_opened(LockId l, StreamSide s) {
    Expr e = Expr::truth();
    for (Orientation o : c_.orientations)
      e = e && Expr::eq(gate(l, s, o), to_u8(Position::opened));
    return e;
  }

  static Atom at(K k, LockId l, StreamSide s) { return on(k).with_lock(A::is(l)).with_side(A::is(s)); }
  static Atom at(K k, LockId l, StreamSide s, Orientation o) { return at(k, l, s).with_orientation(A::is(o)); }

private:
  static std::string suffix(LockId l, StreamSide s) {
    return "_" + std::string(name(l)) + "_" + std::string(name(s));
  }

  std::uint8_t add(const std::string& key, std::uint8_t initial) {
    const auto v = static_cast<std::uint8_t>(spec_.vars.size());
    spec_.vars.push_back({key, initial});
    vars_[key] = v;
    return v;
  }
  void rule(ActionPredicate when, std::uint8_t var, Expr value) {
    spec_.updates.push_back({std::move(when), {{var, std::move(value)}}});
  }

  std::uint8_t position(const char* what, K actuator, K sensor, LockId l, StreamSide s, Orientation o,
                        Position initial) {
    const bool barrier = actuator == K::barrier_actuator;
    const std::string key =
        barrier ? std::string(what) : std::string(what) + suffix(l, s) + "_" + std::string(name(o));
    if (auto it = vars_.find(key); it != vars_.end())
      return it->second;
    const std::uint8_t v = add(key, to_u8(initial));
    auto act = barrier ? on(actuator) : at(actuator, l, s, o);
    auto sen = barrier ? on(sensor) : at(sensor, l, s, o);
    const auto P = [](Position p) { return to_u8(p); };
    const Expr self = Expr::var(v);
    rule(act.with_value(A::is(AC::do_open)), v, Expr::constant(P(Position::opening)));
    rule(act.with_value(A::is(AC::do_close)), v, Expr::constant(P(Position::closing)));
    rule(sen.with_value(A::is(SP::sense_open)), v,
         Expr::ite(Expr::in(v, {P(Position::opening), P(Position::opened)}), Expr::constant(P(Position::opened)),
                   Expr::constant(P(Position::closing))));
    rule(sen.with_value(A::is(SP::sense_closed)), v,
         Expr::ite(Expr::in(v, {P(Position::closing), P(Position::closed)}), Expr::constant(P(Position::closed)),
                   Expr::constant(P(Position::opening))));
    rule(sen.with_value(A::in({SP::sense_intermediate, SP::fail_position})), v,
         Expr::ite(Expr::eq(v, P(Position::opened)), Expr::constant(P(Position::opening)),
                   Expr::ite(Expr::eq(v, P(Position::closed)), Expr::constant(P(Position::closing)), self)));
    return v;
  }

  PlantConfig c_;
  ObligationSpec spec_;
  std::map<std::string, std::uint8_t> vars_;
};

inline std::string pair_label(LockId l, StreamSide s) {
  return "l=" + std::string(name(l)) + ",s=" + std::string(name(s));
}

template <class F>
std::vector<ObligationSpec> per_pair(const PlantConfig& c, F&& f) {
  std::vector<ObligationSpec> out;
  for (LockId l : c.locks)
    for (StreamSide s : c.stream_sides) {
      SpecBuilder b(c, pair_label(l, s));
      f(b, l, s);
      out.push_back(b.done());
    }
  return out;
}

template <class F>
std::vector<ObligationSpec> per_lock(const PlantConfig& c, F&& f) {
  std::vector<ObligationSpec> out;
  for (LockId l : c.locks) {
    SpecBuilder b(c, "l=" + std::string(name(l)));
    f(b, l);
    out.push_back(b.done());
  }
  return out;
}

/// Obligations `k(l, s, o, value)` for every configured orientation.
inline void oblige(SpecBuilder& b, K k, LockId l, StreamSide s, ArgSpec value) {
  for (Orientation o : b.config().orientations)
    b.spec().obligations.push_back(SpecBuilder::at(k, l, s, o).with_value(value));
}

inline void barrier_lights(SpecBuilder& b, StreamSide s, SL colour) {
  for (Orientation o : all_orientations())
    b.spec().obligations.push_back(
        on(K::barrier_light_actuator).with_side(A::is(s)).with_orientation(A::is(o)).with_value(A::is(colour)));
}

inline void lock_lights_red(SpecBuilder& b, LockId l, StreamSide s) {
  oblige(b, K::entering_light_actuator, l, s, A::in({DL::single_red, DL::redred}));
  oblige(b, K::leaving_light_actuator, l, s, A::is(SL::red));
}

inline std::vector<ObligationSpec> barrier_move(const PlantConfig& c, ConsoleCommand cmd) {
  SpecBuilder b(c, "-");
  b.spec().trigger = on(K::barrier_command).with_value(A::is(cmd));
  b.spec().condition =
      b.barrier_red(StreamSide::upstream) && b.barrier_red(StreamSide::downstream) && !b.barrier_emergency();
  const bool open = cmd == ConsoleCommand::command_open;
  b.spec().obligations.push_back(on(K::barrier_actuator).with_value(A::is(open ? AC::do_open : AC::do_close)));
  if (open)
    b.spec().suppress = on(K::barrier_light_sensor).with_value(A::in({SLS::show_green, SLS::fail_single}));
  return {b.done()};
}

inline std::vector<ObligationSpec> barrier_halt(const PlantConfig& c, Atom trigger) {
  SpecBuilder b(c, "-");
  b.spec().trigger = trigger;
  b.spec().obligations.push_back(on(K::barrier_actuator).with_value(A::is(AC::do_emergencyStop)));
  for (StreamSide s : c.stream_sides)
    barrier_lights(b, s, SL::red);
  return {b.done()};
}

inline std::vector<ObligationSpec> commandreq5(const PlantConfig& c) {
  std::vector<ObligationSpec> out;
  for (StreamSide s : c.stream_sides)
    for (SL colour : {SL::red, SL::green}) {
      SpecBuilder b(c, "s=" + std::string(name(s)) + ",c=" + std::string(name(colour)));
      b.spec().trigger = on(K::barrier_light_command).with_side(A::is(s)).with_value(A::is(colour));
      if (colour == SL::green)
        b.spec().condition = Expr::eq(b.barrier(), to_u8(Position::opened));
      barrier_lights(b, s, colour);
      out.push_back(b.done());
    }
  return out;
}

inline std::vector<ObligationSpec> gate_or_paddle(const PlantConfig& c, K command, ConsoleCommand cmd) {
  const bool gates = command == K::gate_command;
  const K actuator = gates ? K::gate_actuator : K::paddle_actuator;
  return per_pair(c, [&](SpecBuilder& b, LockId l, StreamSide s) {
    b.spec().trigger = SpecBuilder::at(command, l, s).with_value(A::is(cmd));
    switch (cmd) {
    case ConsoleCommand::command_close:
      b.spec().condition = gates ? b.entering_red(l, s) && b.leaving_red(l, s) && !b.emergency(l) : !b.emergency(l);
      oblige(b, actuator, l, s, A::is(AC::do_close));
      break;
    case ConsoleCommand::command_open:
      if (gates) {
        b.spec().condition = b.side_closed(l, opposite(s)) && b.entering_red(l, s) && b.leaving_red(l, s) &&
                             b.water(l, s) && !b.emergency(l);
        b.spec().suppress = ActionPredicate{
            SpecBuilder::at(K::entering_light_sensor, l, s)
                .with_value(A::in({DLS::show_single_green, DLS::fail_double})),
            SpecBuilder::at(K::leaving_light_sensor, l, s).with_value(A::in({SLS::show_green, SLS::fail_single}))};
      } else {
        b.spec().condition = b.side_closed(l, opposite(s)) && !b.emergency(l);
      }
      oblige(b, actuator, l, s, A::is(AC::do_open));
      break;
    case ConsoleCommand::command_stop:
      oblige(b, actuator, l, s, A::is(AC::do_emergencyStop));
      if (gates)
        lock_lights_red(b, l, s);
      break;
    }
  });
}

inline std::vector<ObligationSpec> commandreq12(const PlantConfig& c) {
  return per_lock(c, [&](SpecBuilder& b, LockId l) {
    b.spec().trigger = on(K::emergency_lock_command).with_lock(A::is(l)).with_value(A::is(EmergencyCommand::activate));
    for (StreamSide s : c.stream_sides) {
      oblige(b, K::gate_actuator, l, s, A::is(AC::do_emergencyStop));
      oblige(b, K::paddle_actuator, l, s, A::is(AC::do_emergencyStop));
      lock_lights_red(b, l, s);
    }
  });
}

inline std::vector<ObligationSpec> commandreq13(const PlantConfig& c) {
  std::vector<ObligationSpec> out;
  for (SL colour : {SL::red, SL::green}) {
    auto specs = per_pair(c, [&](SpecBuilder& b, LockId l, StreamSide s) {
      b.spec().label += ",c=" + std::string(name(colour));
      b.spec().trigger = SpecBuilder::at(K::leaving_light_command, l, s).with_value(A::is(colour));
      if (colour == SL::green) {
        b.spec().condition = b.gates_opened(l, s) && b.entering_red(l, s);
        b.spec().suppress = SpecBuilder::at(K::entering_light_sensor, l, s)
                                .with_value(A::not_in({DLS::show_single_red, DLS::show_redred}));
      }
      oblige(b, K::leaving_light_actuator, l, s, A::is(colour));
    });
    out.insert(out.end(), specs.begin(), specs.end());
  }
  return out;
}

inline std::vector<ObligationSpec> commandreq14(const PlantConfig& c) {
  std::vector<ObligationSpec> out;
  for (DL colour : {DL::single_red, DL::single_green, DL::redred, DL::redgreen}) {
    auto specs = per_pair(c, [&](SpecBuilder& b, LockId l, StreamSide s) {
      b.spec().label += ",c=" + std::string(name(colour));
      b.spec().trigger = SpecBuilder::at(K::entering_light_command, l, s).with_value(A::is(colour));
      if (colour == DL::redgreen)
        b.spec().condition = b.leaving_red(l, s);
      if (colour == DL::single_green) {
        b.spec().condition = b.leaving_red(l, s) && b.gates_opened(l, s);
        b.spec().suppress = SpecBuilder::at(K::leaving_light_sensor, l, s).with_value(A::not_in({SLS::show_red}));
      }
      oblige(b, K::entering_light_actuator, l, s, A::is(colour));
    });
    out.insert(out.end(), specs.begin(), specs.end());
  }
  return out;
}

inline std::vector<ObligationSpec> livereq4_obligations(const PlantConfig& c) {
  return per_pair(c, [&](SpecBuilder& b, LockId l, StreamSide s) {
    b.spec().trigger = SpecBuilder::at(K::gate_command, l, s).with_value(A::is(ConsoleCommand::command_stop));
    b.spec().condition = Expr::eq(b.entering(l, s), to_u8(DL::redgreen));
    oblige(b, K::entering_light_actuator, l, s, A::in({DL::single_red, DL::redred}));
  });
}

inline std::vector<ObligationSpec> livereq5_obligations(const PlantConfig& c) {
  return per_lock(c, [&](SpecBuilder& b, LockId l) {
    b.spec().trigger = on(K::emergency_lock_command).with_lock(A::is(l)).with_value(A::is(EmergencyCommand::activate));
    for (StreamSide s : c.stream_sides)
      lock_lights_red(b, l, s);
  });
}

inline std::vector<ObligationSpec> livereq6_obligations(const PlantConfig& c) {
  SpecBuilder b(c, "-");
  b.spec().trigger = on(K::emergency_barrier_command).with_value(A::is(EmergencyCommand::activate));
  for (StreamSide s : c.stream_sides)
    barrier_lights(b, s, SL::red);
  return {b.done()};
}

// ---------------------------------------------------------------------------
// Liveness

inline StateCondition paddle_not_closed(LockId l, StreamSide s) {
  StateCondition c;
  c.field = StateCondition::Field::paddle;
  c.lock = l;
  c.side = s;
  c.mask = static_cast<std::uint8_t>(0xf & ~(1u << to_u8(Position::closed)));
  return c;
}

inline std::vector<LivenessSpec> livereq1(const PlantConfig&) {
  LivenessSpec spec;
  spec.label = "-";
  spec.allowed.push_back({ActionPredicate{on(K::barrier_command).with_value(A::is(ConsoleCommand::command_close)),
                                          on(K::barrier_light_command).with_value(A::is(SL::red)),
                                          on(K::emergency_barrier_command)
                                              .with_value(A::is(EmergencyCommand::deactivate)),
                                          on(K::skip)} |
                              outputs(),
                          {}});
  spec.universal_reads = all_reads();
  spec.goals = {on(K::barrier_actuator).with_value(A::is(AC::do_close))};
  return {spec};
}

inline std::vector<LivenessSpec> livereq2(const PlantConfig& c) {
  std::vector<LivenessSpec> out;
  for (LockId l : c.locks)
    for (StreamSide s : c.stream_sides) {
      LivenessSpec spec;
      spec.label = pair_label(l, s);
      spec.allowed.push_back(
          {ActionPredicate{
               SpecBuilder::at(K::gate_command, l, s).with_value(A::is(ConsoleCommand::command_close)),
               SpecBuilder::at(K::entering_light_command, l, s).with_value(A::in({DL::single_red, DL::redred})),
               SpecBuilder::at(K::leaving_light_command, l, s).with_value(A::is(SL::red)),
               on(K::emergency_lock_command).with_lock(A::is(l)).with_value(A::is(EmergencyCommand::deactivate)),
               on(K::skip)} |
               outputs(),
           {}});
      spec.universal_reads = all_reads();
      spec.goals = {SpecBuilder::at(K::gate_actuator, l, s).with_value(A::is(AC::do_close))};
      out.push_back(std::move(spec));
    }
  return out;
}

/// Ships can pass: the operator can always get the gates at one side open.
/// `water_universal` turns the water reading into an uncontrolled one.
inline std::vector<LivenessSpec> livereq3_with(const PlantConfig& c, bool water_universal) {
  std::vector<LivenessSpec> out;
  for (LockId l : c.locks)
    for (StreamSide s : c.stream_sides) {
      const StreamSide os = opposite(s);
      LivenessSpec spec;
      spec.label = pair_label(l, s);
      auto lock = [&](K k) { return on(k).with_lock(A::is(l)); };
      spec.allowed.push_back(
          {ActionPredicate{
               SpecBuilder::at(K::gate_command, l, s).with_value(A::is(ConsoleCommand::command_open)),
               SpecBuilder::at(K::gate_command, l, os).with_value(A::is(ConsoleCommand::command_close)),
               SpecBuilder::at(K::paddle_command, l, os).with_value(A::is(ConsoleCommand::command_close)),
               SpecBuilder::at(K::paddle_command, l, s).with_value(A::is(ConsoleCommand::command_open)),
               lock(K::entering_light_command).with_value(A::in({DL::single_red, DL::redred})),
               lock(K::leaving_light_command).with_value(A::is(SL::red)),
               lock(K::emergency_lock_command).with_value(A::is(EmergencyCommand::deactivate)),
               SpecBuilder::at(K::gate_sensor, l, os).with_value(A::is(SP::sense_closed)),
               SpecBuilder::at(K::paddle_sensor, l, os).with_value(A::is(SP::sense_closed)),
               on(K::skip)} |
               outputs(),
           {}});
      if (water_universal)
        spec.universal_choices.push_back({SpecBuilder::at(K::water_sensor, l, s), paddle_not_closed(l, s)});
      else
        spec.allowed.push_back({SpecBuilder::at(K::water_sensor, l, s).with_value(A::is(WaterLevel::equal)),
                                paddle_not_closed(l, s)});
      spec.essential_reads = ActionPredicate{
          SpecBuilder::at(K::entering_light_sensor, l, s).with_value(A::is(DLS::show_single_red)),
          SpecBuilder::at(K::leaving_light_sensor, l, s).with_value(A::is(SLS::show_red))};
      spec.universal_reads = all_reads();
      spec.goals = {SpecBuilder::at(K::gate_actuator, l, s).with_value(A::is(AC::do_open))};
      out.push_back(std::move(spec));
    }
  return out;
}

inline LivenessSpec scoped(std::string label, ActionPredicate trigger, std::vector<ActionPredicate> goals) {
  LivenessSpec spec;
  spec.label = std::move(label);
  spec.allowed.push_back({outputs(), {}});
  spec.universal_reads = all_reads();
  spec.scope = std::move(trigger);
  spec.goals = std::move(goals);
  return spec;
}

inline std::vector<ActionPredicate> lights_red_goals(const PlantConfig& c, LockId l, StreamSide s) {
  std::vector<ActionPredicate> g;
  for (Orientation o : c.orientations)
    g.push_back(SpecBuilder::at(K::entering_light_actuator, l, s, o).with_value(A::in({DL::single_red, DL::redred})));
  for (Orientation o : c.orientations)
    g.push_back(SpecBuilder::at(K::leaving_light_actuator, l, s, o).with_value(A::is(SL::red)));
  return g;
}

inline std::vector<LivenessSpec> livereq4(const PlantConfig& c) {
  std::vector<LivenessSpec> out;
  for (LockId l : c.locks)
    for (StreamSide s : c.stream_sides) {
      std::vector<ActionPredicate> goals;
      for (Orientation o : c.orientations)
        goals.push_back(
            SpecBuilder::at(K::entering_light_actuator, l, s, o).with_value(A::in({DL::single_red, DL::redred})));
      LivenessSpec spec = scoped(pair_label(l, s),
                                 SpecBuilder::at(K::gate_command, l, s).with_value(A::is(ConsoleCommand::command_stop)),
                                 std::move(goals));
      StateCondition when;
      when.field = StateCondition::Field::entering;
      when.lock = l;
      when.side = s;
      when.mask = 1u << to_u8(DL::redgreen);
      spec.scope_when = when;
      out.push_back(std::move(spec));
    }
  return out;
}

inline std::vector<LivenessSpec> livereq5(const PlantConfig& c) {
  std::vector<LivenessSpec> out;
  for (LockId l : c.locks) {
    std::vector<ActionPredicate> goals;
    for (StreamSide s : c.stream_sides)
      for (auto& g : lights_red_goals(c, l, s))
        goals.push_back(std::move(g));
    out.push_back(scoped("l=" + std::string(name(l)),
                         on(K::emergency_lock_command).with_lock(A::is(l)).with_value(A::is(EmergencyCommand::activate)),
                         std::move(goals)));
  }
  return out;
}

inline std::vector<LivenessSpec> livereq6(const PlantConfig& c) {
  std::vector<ActionPredicate> goals;
  for (StreamSide s : c.stream_sides)
    for (Orientation o : all_orientations())
      goals.push_back(
          on(K::barrier_light_actuator).with_side(A::is(s)).with_orientation(A::is(o)).with_value(A::is(SL::red)));
  return {scoped("-", on(K::emergency_barrier_command).with_value(A::is(EmergencyCommand::activate)),
                 std::move(goals))};
}

inline std::vector<Requirement> build() {
  using C = Category;
  std::vector<Requirement> r;
  auto safety = [&](const char* id, const char* title, auto patterns) {
    r.push_back({id, title, C::safety, 0, patterns, {}, {}});
  };
  auto causality = [&](const char* id, const char* title, auto patterns) {
    r.push_back({id, title, C::causality, 0, patterns, {}, {}});
  };
  auto command = [&](const char* id, const char* title, auto obligations) {
    r.push_back({id, title, C::operator_command, 0, {}, obligations, {}});
  };
  auto one = [](auto f) { return [f](const PlantConfig& c) { return std::vector<SafetyPattern>{f(c)}; }; };

  safety("safreq1", "Opposing paddles cannot be both open simultaneously",
         one([](const PlantConfig& c) { return opposing(c, K::paddle_sensor, K::paddle_actuator, K::paddle_actuator); }));
  safety("safreq2", "Paddles cannot open with an opposing gate open",
         one([](const PlantConfig& c) { return opposing(c, K::gate_sensor, K::gate_actuator, K::paddle_actuator); }));
  safety("safreq3", "Gates cannot open with an opposing paddle open",
         one([](const PlantConfig& c) { return opposing(c, K::paddle_sensor, K::paddle_actuator, K::gate_actuator); }));
  safety("safreq4", "Gates cannot open with an opposing gate open",
         one([](const PlantConfig& c) { return opposing(c, K::gate_sensor, K::gate_actuator, K::gate_actuator); }));
  safety("safreq5", "Gates can only open if the waterlevel is equal", safreq5);
  safety("safreq6", "Traffic lights at entering and leaving side I", safreq6);
  safety("safreq13", "Traffic lights at entering and leaving side II", safreq13);
  safety("safreq7", "Lights cannot be set to green if lock not open I", one([](const PlantConfig& c) {
           return green_needs_open_gate(c, pair(K::entering_light_actuator).with_value(A::is(DL::single_green)));
         }));
  safety("safreq14", "Lights cannot be set to green if lock not open II", one([](const PlantConfig& c) {
           return green_needs_open_gate(c, pair(K::leaving_light_actuator).with_value(A::is(SL::green)));
         }));
  safety("safreq8", "Gates cannot be closed if the lights are not set to red I", one([](const PlantConfig& c) {
           return close_needs_red(c, dev(K::entering_light_actuator).with_value(A::in({DL::single_green, DL::redgreen})),
                                  dev(K::entering_light_actuator).with_value(A::in({DL::single_red, DL::redred})));
         }));
  safety("safreq9", "Gates cannot be closed if the lights are not set to red II", one([](const PlantConfig& c) {
           return close_needs_red(c, dev(K::leaving_light_actuator).with_value(A::is(SL::green)),
                                  dev(K::leaving_light_actuator).with_value(A::is(SL::red)));
         }));
  safety("safreq10", "Gates and paddles cannot move in emergency mode", safreq10);
  safety("safreq23", "End stop opening gate only if open",
         one([](const PlantConfig& c) { return endstop(c, K::gate_sensor, K::gate_actuator, true); }));
  safety("safreq24", "End stop closing gate only if closed",
         one([](const PlantConfig& c) { return endstop(c, K::gate_sensor, K::gate_actuator, false); }));
  safety("safreq27", "End stop opening paddle only if open",
         one([](const PlantConfig& c) { return endstop(c, K::paddle_sensor, K::paddle_actuator, true); }));
  safety("safreq28", "End stop closing gate only if closed",
         one([](const PlantConfig& c) { return endstop(c, K::paddle_sensor, K::paddle_actuator, false); }));
  safety("safreq29", "Barrier only closes when lights are red", safreq29);
  safety("safreq30", "Barrier lights only become green when the barrier is open", safreq30);
  safety("safreq40", "The barrier cannot move in emergency mode", safreq40);
  safety("safreq35", "End stop opening barrier only if the barrier is open",
         [](const PlantConfig&) { return std::vector<SafetyPattern>{barrier_endstop(true)}; });
  safety("safreq36", "End stop closing barrier only if the barrier is closed",
         [](const PlantConfig&) { return std::vector<SafetyPattern>{barrier_endstop(false)}; });

  using CC = ConsoleCommand;
  causality("causreq11", "Emergency stop of a gate", [](const PlantConfig& c) {
    return device_command(c, K::gate_command, K::gate_actuator, CC::command_stop, AC::do_emergencyStop, true);
  });
  causality("causreq12", "Emergency stop of a paddle", [](const PlantConfig& c) {
    return device_command(c, K::paddle_command, K::paddle_actuator, CC::command_stop, AC::do_emergencyStop, true);
  });
  causality("causreq15", "Opening a gate", [](const PlantConfig& c) {
    return device_command(c, K::gate_command, K::gate_actuator, CC::command_open, AC::do_open, false);
  });
  causality("causreq16", "Closing a gate", [](const PlantConfig& c) {
    return device_command(c, K::gate_command, K::gate_actuator, CC::command_close, AC::do_close, false);
  });
  causality("causreq17", "Opening a paddle", [](const PlantConfig& c) {
    return device_command(c, K::paddle_command, K::paddle_actuator, CC::command_open, AC::do_open, false);
  });
  causality("causreq18", "Closing a paddle", [](const PlantConfig& c) {
    return device_command(c, K::paddle_command, K::paddle_actuator, CC::command_close, AC::do_close, false);
  });
  causality("causreq19", "Setting the entering lights in a lock", causreq19);
  causality("causreq20", "Setting the leaving lights in a lock", causreq20);
  causality("causreq31", "Setting the lights of the barrier", causreq31);
  causality("causreq32", "Opening the barrier", [](const PlantConfig&) {
    return barrier_caused(on(K::barrier_command).with_value(A::is(CC::command_open)), AC::do_open);
  });
  causality("causreq33", "Closing the barrier", [](const PlantConfig&) {
    return barrier_caused(on(K::barrier_command).with_value(A::is(CC::command_close)), AC::do_close);
  });
  causality("causreq34", "Stopping the barrier", [](const PlantConfig&) {
    return barrier_caused(ActionPredicate{on(K::barrier_command).with_value(A::is(CC::command_stop)),
                                          on(K::emergency_barrier_command).with_value(A::is(EmergencyCommand::activate))},
                          AC::do_emergencyStop);
  });

  command("commandreq1", "Close command for the barrier",
          [](const PlantConfig& c) { return barrier_move(c, CC::command_close); });
  command("commandreq2", "Open command for the barrier",
          [](const PlantConfig& c) { return barrier_move(c, CC::command_open); });
  command("commandreq3", "Stop command for the barrier", [](const PlantConfig& c) {
    return barrier_halt(c, on(K::barrier_command).with_value(A::is(CC::command_stop)));
  });
  command("commandreq4", "Emergency command for the barrier", [](const PlantConfig& c) {
    return barrier_halt(c, on(K::emergency_barrier_command).with_value(A::is(EmergencyCommand::activate)));
  });
  command("commandreq5", "Lights command for the barrier", commandreq5);
  command("commandreq6", "Close command for gates",
          [](const PlantConfig& c) { return gate_or_paddle(c, K::gate_command, CC::command_close); });
  command("commandreq7", "Open command for gates",
          [](const PlantConfig& c) { return gate_or_paddle(c, K::gate_command, CC::command_open); });
  command("commandreq8", "Stop command for gates",
          [](const PlantConfig& c) { return gate_or_paddle(c, K::gate_command, CC::command_stop); });
  command("commandreq9", "Close command for paddles",
          [](const PlantConfig& c) { return gate_or_paddle(c, K::paddle_command, CC::command_close); });
  command("commandreq10", "Open command for paddles",
          [](const PlantConfig& c) { return gate_or_paddle(c, K::paddle_command, CC::command_open); });
  command("commandreq11", "Stop command for paddles",
          [](const PlantConfig& c) { return gate_or_paddle(c, K::paddle_command, CC::command_stop); });
  command("commandreq12", "Emergency command for a lock", commandreq12);
  command("commandreq13", "Leaving lights commands for a lock", commandreq13);
  command("commandreq14", "Entering lights commands for a lock", commandreq14);

  r.push_back({"livereq1", "The barrier can always be closed", C::liveness, 0, {}, {}, livereq1});
  r.push_back({"livereq2", "Gates can always be closed", C::liveness, 0, {}, {}, livereq2});
  r.push_back({"livereq3", "Ships can pass", C::liveness, 0, {}, {},
               [](const PlantConfig& c) { return livereq3_with(c, false); }});
  r.push_back({"livereq4", "Stopping gates prematurely", C::liveness, 0, {}, livereq4_obligations, livereq4});
  r.push_back({"livereq5", "Emergency stop of the lock", C::liveness, 0, {}, livereq5_obligations, livereq5});
  r.push_back({"livereq6", "Emergency stop of the barrier", C::liveness, 0, {}, livereq6_obligations, livereq6});

  for (std::size_t i = 0; i < r.size(); ++i)
    r[i].number = static_cast<int>(i + 1);
  return r;
}

} // namespace catalog_detail

/// All requirements in listing order.
inline const std::vector<Requirement>& catalog() {
  static const std::vector<Requirement> reqs = catalog_detail::build();
  return reqs;
}

inline const Requirement& requirement(std::string_view id) {
  for (const Requirement& r : catalog())
    if (r.id == id)
      return r;
  throw Error("unknown requirement '" + std::string(id) + "'");
}

/// Resolves a comma-separated list of ids and category aliases ("all",
/// "all-safety", "all-causality", "all-operator", "all-liveness").
inline std::vector<const Requirement*> select_requirements(std::string_view selector) {
  std::vector<const Requirement*> out;
  auto add = [&](const Requirement& r) {
    if (std::find(out.begin(), out.end(), &r) == out.end())
      out.push_back(&r);
  };
  std::size_t pos = 0;
  while (pos <= selector.size()) {
    const std::size_t comma = std::min(selector.find(',', pos), selector.size());
    const std::string_view item = selector.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty())
      continue;
    bool matched = false;
    for (const Requirement& r : catalog())
      if (item == "all" || item == "all-" + std::string(name(r.category)) || item == r.id) {
        add(r);
        matched = true;
      }
    if (!matched)
      throw Error("unknown requirement or category '" + std::string(item) + "'");
  }
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->number < b->number; });
  return out;
}

} // namespace marijke
