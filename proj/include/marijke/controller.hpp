#pragma once

// The lock complex controller as a deterministic labelled transition system.
//
// A state is the parameter record plus a handler mode. In Stable mode every
// command, spontaneous sensor event and skip is enabled. Handlers that need
// light readings move to Awaiting and accept exactly the next read; handlers
// that produce actuator instructions move to Emitting and offer exactly the
// next output. Parameter updates are applied when the handler starts
// emitting, so Emitting only has to remember which burst it is replaying.

#include <array>
#include <bitset>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "marijke/domain.hpp"

namespace marijke {

enum class Position : std::uint8_t { opening, closing, opened, closed };

inline std::string_view name(Position p) {
  static constexpr std::array<std::string_view, 4> names{"opening", "closing", "opened", "closed"};
  return names[to_u8(p)];
}

constexpr std::size_t device_index(LockId l, StreamSide s, Orientation o) noexcept {
  return (to_u8(l) * 2u + to_u8(s)) * 2u + to_u8(o);
}
constexpr std::size_t pair_index(LockId l, StreamSide s) noexcept { return to_u8(l) * 2u + to_u8(s); }

/// The controller's parameters. Arrays cover the full topology; entries for
/// devices outside the configuration keep their initial values forever.
struct ControllerParams {
  Position barrier_status = Position::opened;
  bool barrier_in_emergency = false;
  std::array<SingleLight, 2> barrier_light_set{SingleLight::red, SingleLight::red};
  std::array<Position, 8> gate_status{filled(Position::closed)};
  std::array<Position, 8> paddle_status{filled(Position::closed)};
  std::array<DoubleLight, 4> entering_light_set{DoubleLight::single_red, DoubleLight::single_red,
                                                DoubleLight::single_red, DoubleLight::single_red};
  std::array<SingleLight, 4> leaving_light_set{SingleLight::red, SingleLight::red, SingleLight::red,
                                               SingleLight::red};
  std::array<bool, 4> water_equal{};
  std::uint8_t locks_in_emergency = 0; ///< bit per LockId

  Position& gate(LockId l, StreamSide s, Orientation o) { return gate_status[device_index(l, s, o)]; }
  Position gate(LockId l, StreamSide s, Orientation o) const { return gate_status[device_index(l, s, o)]; }
  Position& paddle(LockId l, StreamSide s, Orientation o) { return paddle_status[device_index(l, s, o)]; }
  Position paddle(LockId l, StreamSide s, Orientation o) const { return paddle_status[device_index(l, s, o)]; }
  DoubleLight& entering(LockId l, StreamSide s) { return entering_light_set[pair_index(l, s)]; }
  DoubleLight entering(LockId l, StreamSide s) const { return entering_light_set[pair_index(l, s)]; }
  SingleLight& leaving(LockId l, StreamSide s) { return leaving_light_set[pair_index(l, s)]; }
  SingleLight leaving(LockId l, StreamSide s) const { return leaving_light_set[pair_index(l, s)]; }
  bool& water(LockId l, StreamSide s) { return water_equal[pair_index(l, s)]; }
  bool water(LockId l, StreamSide s) const { return water_equal[pair_index(l, s)]; }

  bool in_emergency(LockId l) const { return (locks_in_emergency >> to_u8(l)) & 1u; }
  void set_emergency(LockId l, bool on) {
    const auto bit = static_cast<std::uint8_t>(1u << to_u8(l));
    locks_in_emergency = on ? (locks_in_emergency | bit) : (locks_in_emergency & ~bit);
  }

  friend bool operator==(const ControllerParams&, const ControllerParams&) = default;

private:
  static constexpr std::array<Position, 8> filled(Position p) { return {p, p, p, p, p, p, p, p}; }
};

// ---------------------------------------------------------------------------
// Seeded faults used to show that the requirement checks have teeth.

enum class Mutation : std::uint8_t {
  drop_water_equal_guard,
  drop_emergency_check_gate_close,
  gate_close_ignores_lights,
  barrier_open_ignores_lights,
  skip_light_red_on_stop,
  fail_single_as_red,
  drop_opposite_paddle_check,
  drop_redgreen_guard,
  endstop_without_end_position,
};

inline constexpr std::size_t mutation_count = 9;

inline constexpr std::array<std::string_view, mutation_count> mutation_names{
    "drop_water_equal_guard",      "drop_emergency_check_gate_close", "gate_close_ignores_lights",
    "barrier_open_ignores_lights", "skip_light_red_on_stop",          "fail_single_as_red",
    "drop_opposite_paddle_check",  "drop_redgreen_guard",             "endstop_without_end_position",
};

inline std::string_view name(Mutation m) { return mutation_names[to_u8(m)]; }

inline Mutation parse_mutation(std::string_view s) {
  for (std::size_t i = 0; i < mutation_count; ++i)
    if (mutation_names[i] == s)
      return static_cast<Mutation>(i);
  throw ParseError("unknown mutation '" + std::string(s) + "'");
}

class MutationSet {
public:
  MutationSet() = default;
  MutationSet(std::initializer_list<Mutation> ms) {
    for (Mutation m : ms)
      bits_.set(to_u8(m));
  }
  bool has(Mutation m) const { return bits_.test(to_u8(m)); }
  bool empty() const { return bits_.none(); }
  MutationSet with(Mutation m) const {
    MutationSet r = *this;
    r.bits_.set(to_u8(m));
    return r;
  }
  friend bool operator==(const MutationSet&, const MutationSet&) = default;

private:
  std::bitset<mutation_count> bits_;
};

// ---------------------------------------------------------------------------
// Modes

/// Which inline light check a handler is performing.
enum class CheckKind : std::uint8_t { gate_open, entering_green, leaving_green, barrier_open };

/// Which deterministic output sequence is being emitted.
enum class BurstKind : std::uint8_t {
  lock_emergency,
  gate_open,
  gate_close,
  gate_stop,
  gate_endstop_open,
  gate_endstop_close,
  paddle_open,
  paddle_close,
  paddle_stop,
  paddle_endstop_open,
  paddle_endstop_close,
  entering_set,
  leaving_set,
  barrier_emergency,
  barrier_open,
  barrier_close,
  barrier_stop,
  barrier_light_set,
  barrier_endstop_open,
  barrier_endstop_close,
};

inline constexpr std::size_t burst_kind_count = 20;

struct Stable {
  friend bool operator==(const Stable&, const Stable&) = default;
};

struct Awaiting {
  CheckKind check = CheckKind::gate_open;
  LockId lock = LockId::north;
  StreamSide side = StreamSide::upstream;
  std::uint8_t reads_done = 0;
  bool acceptable = true; ///< every response so far passed the check
  friend bool operator==(const Awaiting&, const Awaiting&) = default;
};

struct Emitting {
  BurstKind burst = BurstKind::lock_emergency;
  LockId lock = LockId::north;
  StreamSide side = StreamSide::upstream;
  Orientation orientation = Orientation::east;
  std::uint8_t cursor = 0;
  friend bool operator==(const Emitting&, const Emitting&) = default;
};

using Mode = std::variant<Stable, Awaiting, Emitting>;

enum class ModeTag : std::uint8_t { stable, awaiting, emitting };

struct ControllerState {
  ControllerParams params;
  Mode mode;

  ModeTag tag() const noexcept { return static_cast<ModeTag>(mode.index()); }
  bool is_stable() const noexcept { return mode.index() == 0; }
  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

/// Bounded output list of a single burst (the longest is a lock emergency:
/// 16 outputs on the full configuration).
struct OutputList {
  std::array<Action, 16> items{};
  std::uint8_t size = 0;

  void push(const Action& a) { items[size++] = a; }
  const Action* begin() const { return items.data(); }
  const Action* end() const { return items.data() + size; }
  const Action& operator[](std::size_t i) const { return items[i]; }
};

/// Result of driving one Stable input to the next Stable state.
struct BurstResult {
  ControllerState state;
  std::vector<Action> reads;   ///< completed reads, in order
  std::vector<Action> outputs; ///< actuator instructions, in order
  std::vector<Action> trace;   ///< input, reads and outputs in step order
};

/// Completes an awaited read (value slot unset) with the sensed value.
using Responder = std::function<Action(const Action& read)>;

class Controller {
public:
  explicit Controller(PlantConfig config, MutationSet mutations = {})
      : alphabet_(std::move(config)), mutations_(mutations) {
    for (const Action& a : alphabet_.actions())
      if (a.is_stable_input())
        stable_inputs_.push_back(a);
  }

  const PlantConfig& config() const noexcept { return alphabet_.config(); }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  MutationSet mutations() const noexcept { return mutations_; }

  ControllerState initial_state() const { return {ControllerParams{}, Stable{}}; }

  /// Every input accepted in Stable mode, in encoding order.
  const std::vector<Action>& stable_inputs() const noexcept { return stable_inputs_; }

  /// Enabled actions in encoding order.
  std::vector<Action> enabled(const ControllerState& st) const {
    switch (st.tag()) {
    case ModeTag::stable: return stable_inputs_;
    case ModeTag::awaiting: {
      const Action head = head_read(st);
      std::vector<Action> out;
      const std::size_t n = value_count(info(head.kind).value);
      for (std::size_t v = 0; v < n; ++v) {
        Action a = head;
        a.value = static_cast<std::uint8_t>(v);
        out.push_back(a);
      }
      return out;
    }
    case ModeTag::emitting: return {head_output(st)};
    }
    return {};
  }

  bool is_enabled(const ControllerState& st, const Action& a) const {
    if (!alphabet_.contains(a))
      return false;
    switch (st.tag()) {
    case ModeTag::stable: return a.is_stable_input();
    case ModeTag::awaiting: {
      Action head = head_read(st);
      head.value = a.value;
      return head == a;
    }
    case ModeTag::emitting: return head_output(st) == a;
    }
    return false;
  }

  ControllerState step(const ControllerState& st, const Action& a) const {
    if (!is_enabled(st, a))
      throw ContractViolation("action not enabled: " + to_string(a));
    return step_unchecked(st, a);
  }

  /// Successor for an action known to be enabled.
  ControllerState step_unchecked(const ControllerState& st, const Action& a) const {
    switch (st.tag()) {
    case ModeTag::stable: return on_input(st.params, a);
    case ModeTag::awaiting: return on_read(st.params, std::get<Awaiting>(st.mode), a);
    case ModeTag::emitting: {
      Emitting e = std::get<Emitting>(st.mode);
      if (++e.cursor >= queue(e, st.params).size)
        return {st.params, Stable{}};
      return {st.params, e};
    }
    }
    return st;
  }

  /// The read the controller is waiting for, value slot zero.
  Action head_read(const ControllerState& st) const {
    const auto& w = std::get<Awaiting>(st.mode);
    return read_at(w.check, w.lock, w.side, w.reads_done);
  }

  std::size_t read_count(CheckKind check) const {
    const std::size_t n = config().orientations.size();
    switch (check) {
    case CheckKind::gate_open: return 2 * n;
    case CheckKind::entering_green:
    case CheckKind::leaving_green: return n;
    case CheckKind::barrier_open: return 4;
    }
    return 0;
  }

  Action read_at(CheckKind check, LockId l, StreamSide s, std::size_t i) const {
    const auto& orients = config().orientations;
    const std::size_t n = orients.size();
    switch (check) {
    case CheckKind::gate_open:
      if (i < n)
        return Action::entering_light_sensor(l, s, orients[i], DoubleLightStatus::show_single_red);
      return Action::leaving_light_sensor(l, s, orients[i - n], SingleLightStatus::show_red);
    case CheckKind::entering_green: return Action::leaving_light_sensor(l, s, orients[i], SingleLightStatus::show_red);
    case CheckKind::leaving_green:
      return Action::entering_light_sensor(l, s, orients[i], DoubleLightStatus::show_single_red);
    case CheckKind::barrier_open:
      return Action::barrier_light_sensor(static_cast<StreamSide>(i / 2), static_cast<Orientation>(i % 2),
                                          SingleLightStatus::show_red);
    }
    return {};
  }

  Action head_output(const ControllerState& st) const {
    const auto& e = std::get<Emitting>(st.mode);
    return queue(e, st.params)[e.cursor];
  }

  /// Reads performed by a check, in their fixed order, value slot zero.
  std::vector<Action> reads(const Awaiting& w) const { return reads(w.check, w.lock, w.side); }

  std::vector<Action> reads(CheckKind check, LockId l, StreamSide s) const {
    std::vector<Action> out;
    for (std::size_t i = 0, n = read_count(check); i < n; ++i)
      out.push_back(read_at(check, l, s, i));
    return out;
  }

  /// The outputs of a burst given the parameters it committed.
  OutputList queue(const Emitting& e, const ControllerParams& p) const {
    OutputList q;
    const auto& orients = config().orientations;
    const LockId l = e.lock;
    const StreamSide s = e.side;
    const std::array<StreamSide, 2> sides{StreamSide::upstream, StreamSide::downstream};
    auto gates = [&](ActuatorCommand c) {
      for (Orientation o : orients)
        q.push(Action::gate_actuator(l, s, o, c));
    };
    auto paddles = [&](ActuatorCommand c) {
      for (Orientation o : orients)
        q.push(Action::paddle_actuator(l, s, o, c));
    };
    auto entering = [&](StreamSide side) {
      for (Orientation o : orients)
        q.push(Action::entering_light_actuator(l, side, o, p.entering(l, side)));
    };
    auto leaving = [&](StreamSide side) {
      for (Orientation o : orients)
        q.push(Action::leaving_light_actuator(l, side, o, p.leaving(l, side)));
    };
    auto barrier_lights = [&](StreamSide side) {
      for (Orientation o : all_orientations())
        q.push(Action::barrier_light_actuator(side, o, p.barrier_light_set[to_u8(side)]));
    };
    switch (e.burst) {
    case BurstKind::lock_emergency:
      for (StreamSide side : sides)
        for (Orientation o : orients)
          q.push(Action::gate_actuator(l, side, o, ActuatorCommand::do_emergencyStop));
      for (StreamSide side : sides)
        for (Orientation o : orients)
          q.push(Action::paddle_actuator(l, side, o, ActuatorCommand::do_emergencyStop));
      for (StreamSide side : sides)
        entering(side);
      for (StreamSide side : sides)
        leaving(side);
      break;
    case BurstKind::gate_open: gates(ActuatorCommand::do_open); break;
    case BurstKind::gate_close: gates(ActuatorCommand::do_close); break;
    case BurstKind::gate_stop:
      gates(ActuatorCommand::do_emergencyStop);
      if (!mutations_.has(Mutation::skip_light_red_on_stop)) {
        entering(s);
        leaving(s);
      }
      break;
    case BurstKind::gate_endstop_open:
      q.push(Action::gate_actuator(l, s, e.orientation, ActuatorCommand::do_endStopOpening));
      break;
    case BurstKind::gate_endstop_close:
      q.push(Action::gate_actuator(l, s, e.orientation, ActuatorCommand::do_endStopClosing));
      break;
    case BurstKind::paddle_open: paddles(ActuatorCommand::do_open); break;
    case BurstKind::paddle_close: paddles(ActuatorCommand::do_close); break;
    case BurstKind::paddle_stop: paddles(ActuatorCommand::do_emergencyStop); break;
    case BurstKind::paddle_endstop_open:
      q.push(Action::paddle_actuator(l, s, e.orientation, ActuatorCommand::do_endStopOpening));
      break;
    case BurstKind::paddle_endstop_close:
      q.push(Action::paddle_actuator(l, s, e.orientation, ActuatorCommand::do_endStopClosing));
      break;
    case BurstKind::entering_set: entering(s); break;
    case BurstKind::leaving_set: leaving(s); break;
    case BurstKind::barrier_emergency:
      q.push(Action::barrier_actuator(ActuatorCommand::do_emergencyStop));
      for (StreamSide side : sides)
        barrier_lights(side);
      break;
    case BurstKind::barrier_open: q.push(Action::barrier_actuator(ActuatorCommand::do_open)); break;
    case BurstKind::barrier_close: q.push(Action::barrier_actuator(ActuatorCommand::do_close)); break;
    case BurstKind::barrier_stop:
      q.push(Action::barrier_actuator(ActuatorCommand::do_emergencyStop));
      if (!mutations_.has(Mutation::skip_light_red_on_stop))
        for (StreamSide side : sides)
          barrier_lights(side);
      break;
    case BurstKind::barrier_light_set: barrier_lights(s); break;
    case BurstKind::barrier_endstop_open:
      q.push(Action::barrier_actuator(ActuatorCommand::do_endStopOpening));
      break;
    case BurstKind::barrier_endstop_close:
      q.push(Action::barrier_actuator(ActuatorCommand::do_endStopClosing));
      break;
    }
    return q;
  }

  /// Drives `input` from a Stable state to the next Stable state, asking
  /// `responder` for every inline read.
  BurstResult run_burst(const ControllerState& st, const Action& input, const Responder& responder) const {
    if (!st.is_stable())
      throw ContractViolation("run_burst requires a stable state");
    BurstResult r;
    r.trace.push_back(input);
    ControllerState cur = step(st, input);
    while (!cur.is_stable()) {
      Action next;
      if (cur.tag() == ModeTag::awaiting) {
        const Action want = head_read(cur);
        next = responder(want);
        Action shape = next;
        shape.value = want.value;
        if (shape != want || !alphabet_.contains(next))
          throw InvalidAction("responder answered " + to_string(next) + " for " + to_string(want));
        r.reads.push_back(next);
      } else {
        next = head_output(cur);
        r.outputs.push_back(next);
      }
      r.trace.push_back(next);
      cur = step_unchecked(cur, next);
    }
    r.state = cur;
    return r;
  }

private:
  static ControllerState stable(const ControllerParams& p) { return {p, Stable{}}; }
  static ControllerState emit(const ControllerParams& p, BurstKind b, LockId l = LockId::north,
                              StreamSide s = StreamSide::upstream, Orientation o = Orientation::east) {
    return {p, Emitting{b, l, s, o, 0}};
  }

  enum class Endstop { none, opening, closing };

  /// Position bookkeeping shared by the gate, paddle and barrier sensors.
  Endstop sense(Position& pos, SensorPosition v) const {
    switch (v) {
    case SensorPosition::sense_open:
      if (pos == Position::opening || pos == Position::opened) {
        pos = Position::opened;
        return Endstop::opening;
      }
      pos = Position::closing;
      return Endstop::none;
    case SensorPosition::sense_closed:
      if (pos == Position::closing || pos == Position::closed) {
        pos = Position::closed;
        return Endstop::closing;
      }
      pos = Position::opening;
      return Endstop::none;
    case SensorPosition::sense_intermediate:
    case SensorPosition::fail_position:
      if (mutations_.has(Mutation::endstop_without_end_position) &&
          (pos == Position::opening || pos == Position::opened)) {
        pos = Position::opened;
        return Endstop::opening;
      }
      if (pos == Position::opened)
        pos = Position::opening;
      else if (pos == Position::closed)
        pos = Position::closing;
      return Endstop::none;
    }
    return Endstop::none;
  }

  bool all_gates(const ControllerParams& p, LockId l, StreamSide s, Position want) const {
    for (Orientation o : config().orientations)
      if (p.gate(l, s, o) != want)
        return false;
    return true;
  }
  bool all_paddles(const ControllerParams& p, LockId l, StreamSide s, Position want) const {
    for (Orientation o : config().orientations)
      if (p.paddle(l, s, o) != want)
        return false;
    return true;
  }
  static bool entering_red(DoubleLight d) { return d == DoubleLight::single_red || d == DoubleLight::redred; }

  ControllerState on_input(const ControllerParams& p0, const Action& a) const {
    ControllerParams p = p0;
    const LockId l = a.lock;
    const StreamSide s = a.side;
    const auto& orients = config().orientations;
    switch (a.kind) {
    case ActionKind::skip: return stable(p);

    case ActionKind::emergency_lock_command:
      if (a.as<EmergencyCommand>() == EmergencyCommand::deactivate) {
        p.set_emergency(l, false);
        return stable(p);
      }
      for (StreamSide side : {StreamSide::upstream, StreamSide::downstream}) {
        DoubleLight& e = p.entering(l, side);
        if (e == DoubleLight::single_green)
          e = DoubleLight::single_red;
        else if (e == DoubleLight::redgreen)
          e = DoubleLight::redred;
        p.leaving(l, side) = SingleLight::red;
      }
      p.set_emergency(l, true);
      return emit(p, BurstKind::lock_emergency, l);

    case ActionKind::gate_command:
      switch (a.as<ConsoleCommand>()) {
      case ConsoleCommand::command_open: {
        const StreamSide os = opposite(s);
        const bool ok = all_gates(p, l, os, Position::closed) && all_paddles(p, l, os, Position::closed) &&
                        entering_red(p.entering(l, s)) && p.leaving(l, s) == SingleLight::red &&
                        (p.water(l, s) || mutations_.has(Mutation::drop_water_equal_guard)) && !p.in_emergency(l);
        if (!ok)
          return stable(p);
        return {p, Awaiting{CheckKind::gate_open, l, s, 0, true}};
      }
      case ConsoleCommand::command_close: {
        const bool lights = entering_red(p.entering(l, s)) && p.leaving(l, s) == SingleLight::red;
        const bool ok = (lights || mutations_.has(Mutation::gate_close_ignores_lights)) &&
                        (!p.in_emergency(l) || mutations_.has(Mutation::drop_emergency_check_gate_close));
        if (!ok)
          return stable(p);
        for (Orientation o : orients)
          p.gate(l, s, o) = Position::closing;
        return emit(p, BurstKind::gate_close, l, s);
      }
      case ConsoleCommand::command_stop:
        p.entering(l, s) = DoubleLight::single_red;
        p.leaving(l, s) = SingleLight::red;
        return emit(p, BurstKind::gate_stop, l, s);
      }
      break;

    case ActionKind::paddle_command:
      switch (a.as<ConsoleCommand>()) {
      case ConsoleCommand::command_open: {
        const StreamSide os = opposite(s);
        const bool ok =
            !p.in_emergency(l) && all_gates(p, l, os, Position::closed) &&
            (all_paddles(p, l, os, Position::closed) || mutations_.has(Mutation::drop_opposite_paddle_check));
        if (!ok)
          return stable(p);
        for (Orientation o : orients)
          p.paddle(l, s, o) = Position::opening;
        return emit(p, BurstKind::paddle_open, l, s);
      }
      case ConsoleCommand::command_close:
        if (p.in_emergency(l))
          return stable(p);
        for (Orientation o : orients)
          p.paddle(l, s, o) = Position::closing;
        return emit(p, BurstKind::paddle_close, l, s);
      case ConsoleCommand::command_stop: return emit(p, BurstKind::paddle_stop, l, s);
      }
      break;

    case ActionKind::gate_sensor:
      switch (sense(p.gate(l, s, a.orientation), a.as<SensorPosition>())) {
      case Endstop::opening: return emit(p, BurstKind::gate_endstop_open, l, s, a.orientation);
      case Endstop::closing: return emit(p, BurstKind::gate_endstop_close, l, s, a.orientation);
      case Endstop::none: return stable(p);
      }
      break;

    case ActionKind::paddle_sensor:
      switch (sense(p.paddle(l, s, a.orientation), a.as<SensorPosition>())) {
      case Endstop::opening: return emit(p, BurstKind::paddle_endstop_open, l, s, a.orientation);
      case Endstop::closing: return emit(p, BurstKind::paddle_endstop_close, l, s, a.orientation);
      case Endstop::none: return stable(p);
      }
      break;

    case ActionKind::water_sensor:
      p.water(l, s) = a.as<WaterLevel>() == WaterLevel::equal;
      return stable(p);

    case ActionKind::entering_light_command: {
      const auto c = a.as<DoubleLight>();
      switch (c) {
      case DoubleLight::single_red:
      case DoubleLight::redred:
        p.entering(l, s) = c;
        return emit(p, BurstKind::entering_set, l, s);
      case DoubleLight::redgreen:
        if (p.leaving(l, s) != SingleLight::red && !mutations_.has(Mutation::drop_redgreen_guard))
          return stable(p);
        p.entering(l, s) = c;
        return emit(p, BurstKind::entering_set, l, s);
      case DoubleLight::single_green:
        if (p.leaving(l, s) != SingleLight::red || !all_gates(p, l, s, Position::opened))
          return stable(p);
        return {p, Awaiting{CheckKind::entering_green, l, s, 0, true}};
      }
      break;
    }

    case ActionKind::leaving_light_command:
      if (a.as<SingleLight>() == SingleLight::red) {
        p.leaving(l, s) = SingleLight::red;
        return emit(p, BurstKind::leaving_set, l, s);
      }
      if (!entering_red(p.entering(l, s)) || !all_gates(p, l, s, Position::opened))
        return stable(p);
      return {p, Awaiting{CheckKind::leaving_green, l, s, 0, true}};

    case ActionKind::emergency_barrier_command:
      if (a.as<EmergencyCommand>() == EmergencyCommand::deactivate) {
        p.barrier_in_emergency = false;
        return stable(p);
      }
      p.barrier_in_emergency = true;
      p.barrier_light_set = {SingleLight::red, SingleLight::red};
      return emit(p, BurstKind::barrier_emergency);

    case ActionKind::barrier_command: {
      const bool lights_red =
          p.barrier_light_set[0] == SingleLight::red && p.barrier_light_set[1] == SingleLight::red;
      switch (a.as<ConsoleCommand>()) {
      case ConsoleCommand::command_open:
        if (mutations_.has(Mutation::barrier_open_ignores_lights)) {
          if (p.barrier_in_emergency)
            return stable(p);
          p.barrier_status = Position::opening;
          return emit(p, BurstKind::barrier_open);
        }
        if (!lights_red || p.barrier_in_emergency)
          return stable(p);
        return {p, Awaiting{CheckKind::barrier_open, LockId::north, StreamSide::upstream, 0, true}};
      case ConsoleCommand::command_close:
        if (!lights_red || p.barrier_in_emergency)
          return stable(p);
        p.barrier_status = Position::closing;
        return emit(p, BurstKind::barrier_close);
      case ConsoleCommand::command_stop:
        p.barrier_light_set = {SingleLight::red, SingleLight::red};
        return emit(p, BurstKind::barrier_stop);
      }
      break;
    }

    case ActionKind::barrier_light_command:
      if (a.as<SingleLight>() == SingleLight::green && p.barrier_status != Position::opened)
        return stable(p);
      p.barrier_light_set[to_u8(s)] = a.as<SingleLight>();
      return emit(p, BurstKind::barrier_light_set, LockId::north, s);

    case ActionKind::barrier_sensor:
      switch (sense(p.barrier_status, a.as<SensorPosition>())) {
      case Endstop::opening: return emit(p, BurstKind::barrier_endstop_open);
      case Endstop::closing: return emit(p, BurstKind::barrier_endstop_close);
      case Endstop::none: return stable(p);
      }
      break;

    default: break;
    }
    throw ContractViolation("not a stable input: " + to_string(a));
  }

  bool read_ok(CheckKind check, const Action& r) const {
    if (r.kind == ActionKind::entering_light_sensor) {
      const auto v = r.as<DoubleLightStatus>();
      if (check == CheckKind::gate_open)
        return v == DoubleLightStatus::show_single_red || v == DoubleLightStatus::show_redred ||
               v == DoubleLightStatus::show_redgreen;
      return v == DoubleLightStatus::show_single_red || v == DoubleLightStatus::show_redred;
    }
    const auto v = r.as<SingleLightStatus>();
    return v == SingleLightStatus::show_red ||
           (v == SingleLightStatus::fail_single && mutations_.has(Mutation::fail_single_as_red));
  }

  ControllerState on_read(const ControllerParams& p0, Awaiting w, const Action& r) const {
    w.acceptable = w.acceptable && read_ok(w.check, r);
    ++w.reads_done;
    if (w.reads_done < read_count(w.check))
      return {p0, w};
    if (!w.acceptable)
      return stable(p0);
    ControllerParams p = p0;
    switch (w.check) {
    case CheckKind::gate_open:
      for (Orientation o : config().orientations)
        p.gate(w.lock, w.side, o) = Position::opening;
      return emit(p, BurstKind::gate_open, w.lock, w.side);
    case CheckKind::entering_green:
      p.entering(w.lock, w.side) = DoubleLight::single_green;
      return emit(p, BurstKind::entering_set, w.lock, w.side);
    case CheckKind::leaving_green:
      p.leaving(w.lock, w.side) = SingleLight::green;
      return emit(p, BurstKind::leaving_set, w.lock, w.side);
    case CheckKind::barrier_open:
      p.barrier_status = Position::opening;
      return emit(p, BurstKind::barrier_open);
    }
    return stable(p);
  }

  Alphabet alphabet_;
  MutationSet mutations_;
  std::vector<Action> stable_inputs_;
};

} // namespace marijke
