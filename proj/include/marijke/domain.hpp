#pragma once

// Plant topology, communication sorts and the action alphabet of the lock
// complex controller.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "marijke/error.hpp"

namespace marijke {

enum class LockId : std::uint8_t { north, south };
enum class StreamSide : std::uint8_t { upstream, downstream };
enum class Orientation : std::uint8_t { east, west };

enum class ConsoleCommand : std::uint8_t { command_open, command_close, command_stop };
enum class EmergencyCommand : std::uint8_t { activate, deactivate };
enum class ActuatorCommand : std::uint8_t {
  do_open,
  do_close,
  do_emergencyStop,
  do_endStopClosing,
  do_endStopOpening,
};
enum class SensorPosition : std::uint8_t { sense_open, sense_closed, sense_intermediate, fail_position };
enum class SingleLight : std::uint8_t { red, green };
enum class DoubleLight : std::uint8_t { single_red, single_green, redred, redgreen };
enum class SingleLightStatus : std::uint8_t { show_red, show_green, fail_single };
enum class DoubleLightStatus : std::uint8_t {
  show_single_red,
  show_single_green,
  show_redred,
  show_redgreen,
  fail_double,
};
enum class WaterLevel : std::uint8_t { equal, unequal, fail_water_sensor };

constexpr StreamSide opposite(StreamSide s) noexcept {
  return s == StreamSide::upstream ? StreamSide::downstream : StreamSide::upstream;
}

constexpr SingleLightStatus show(SingleLight l) noexcept {
  return l == SingleLight::red ? SingleLightStatus::show_red : SingleLightStatus::show_green;
}

constexpr DoubleLightStatus show(DoubleLight l) noexcept {
  switch (l) {
  case DoubleLight::single_red: return DoubleLightStatus::show_single_red;
  case DoubleLight::single_green: return DoubleLightStatus::show_single_green;
  case DoubleLight::redred: return DoubleLightStatus::show_redred;
  case DoubleLight::redgreen: return DoubleLightStatus::show_redgreen;
  }
  return DoubleLightStatus::fail_double;
}

template <class E>
constexpr std::uint8_t to_u8(E e) noexcept {
  return static_cast<std::uint8_t>(e);
}

// ---------------------------------------------------------------------------
// Value sorts

/// The sort carried in the value slot of an action.
enum class ValueType : std::uint8_t {
  none,
  console_command,
  emergency_command,
  actuator_command,
  sensor_position,
  single_light,
  double_light,
  single_light_status,
  double_light_status,
  water_level,
};

namespace detail {

inline constexpr std::array<std::string_view, 2> lock_names{"north", "south"};
inline constexpr std::array<std::string_view, 2> side_names{"upstream", "downstream"};
inline constexpr std::array<std::string_view, 2> orientation_names{"east", "west"};

inline constexpr std::array<std::string_view, 3> console_names{"command_open", "command_close", "command_stop"};
inline constexpr std::array<std::string_view, 2> emergency_names{"activate", "deactivate"};
inline constexpr std::array<std::string_view, 5> actuator_names{
    "do_open", "do_close", "do_emergencyStop", "do_endStopClosing", "do_endStopOpening"};
inline constexpr std::array<std::string_view, 4> sensor_names{
    "sense_open", "sense_closed", "sense_intermediate", "fail_position"};
inline constexpr std::array<std::string_view, 2> single_light_names{"red", "green"};
inline constexpr std::array<std::string_view, 4> double_light_names{"single_red", "single_green", "redred", "redgreen"};
inline constexpr std::array<std::string_view, 3> single_status_names{"show(red)", "show(green)", "fail_single"};
inline constexpr std::array<std::string_view, 5> double_status_names{
    "show(single_red)", "show(single_green)", "show(redred)", "show(redgreen)", "fail_double"};
inline constexpr std::array<std::string_view, 3> water_names{"equal", "unequal", "fail_water_sensor"};

} // namespace detail

constexpr std::span<const std::string_view> value_names(ValueType t) noexcept {
  switch (t) {
  case ValueType::none: return {};
  case ValueType::console_command: return detail::console_names;
  case ValueType::emergency_command: return detail::emergency_names;
  case ValueType::actuator_command: return detail::actuator_names;
  case ValueType::sensor_position: return detail::sensor_names;
  case ValueType::single_light: return detail::single_light_names;
  case ValueType::double_light: return detail::double_light_names;
  case ValueType::single_light_status: return detail::single_status_names;
  case ValueType::double_light_status: return detail::double_status_names;
  case ValueType::water_level: return detail::water_names;
  }
  return {};
}

constexpr std::size_t value_count(ValueType t) noexcept { return value_names(t).size(); }

inline std::string_view name(LockId v) { return detail::lock_names[to_u8(v)]; }
inline std::string_view name(StreamSide v) { return detail::side_names[to_u8(v)]; }
inline std::string_view name(Orientation v) { return detail::orientation_names[to_u8(v)]; }
inline std::string_view name(ConsoleCommand v) { return detail::console_names[to_u8(v)]; }
inline std::string_view name(EmergencyCommand v) { return detail::emergency_names[to_u8(v)]; }
inline std::string_view name(ActuatorCommand v) { return detail::actuator_names[to_u8(v)]; }
inline std::string_view name(SensorPosition v) { return detail::sensor_names[to_u8(v)]; }
inline std::string_view name(SingleLight v) { return detail::single_light_names[to_u8(v)]; }
inline std::string_view name(DoubleLight v) { return detail::double_light_names[to_u8(v)]; }
inline std::string_view name(SingleLightStatus v) { return detail::single_status_names[to_u8(v)]; }
inline std::string_view name(DoubleLightStatus v) { return detail::double_status_names[to_u8(v)]; }
inline std::string_view name(WaterLevel v) { return detail::water_names[to_u8(v)]; }

// ---------------------------------------------------------------------------
// Plant configuration

struct PlantConfig {
  std::vector<LockId> locks;
  std::vector<StreamSide> stream_sides;
  std::vector<Orientation> orientations;
  bool include_barrier = true;

  /// Two locks, both orientations, barrier: the real installation.
  static PlantConfig full() {
    return {{LockId::north, LockId::south},
            {StreamSide::upstream, StreamSide::downstream},
            {Orientation::east, Orientation::west},
            true};
  }

  /// One lock (north), one orientation (east), barrier included. Small
  /// enough for exhaustive exploration.
  static PlantConfig reduced() {
    return {{LockId::north}, {StreamSide::upstream, StreamSide::downstream}, {Orientation::east}, true};
  }

  void validate() const {
    auto sorted_unique = [](const auto& v) {
      return std::is_sorted(v.begin(), v.end()) && std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    if (locks.empty())
      throw ConfigError("config: at least one lock is required");
    if (orientations.empty())
      throw ConfigError("config: at least one orientation is required");
    if (stream_sides != std::vector<StreamSide>{StreamSide::upstream, StreamSide::downstream})
      throw ConfigError("config: stream_sides must be exactly [upstream, downstream]");
    if (!sorted_unique(locks) || !sorted_unique(orientations))
      throw ConfigError("config: locks and orientations must be listed once each in canonical order");
  }

  bool has_lock(LockId l) const { return std::find(locks.begin(), locks.end(), l) != locks.end(); }
  bool has_orientation(Orientation o) const {
    return std::find(orientations.begin(), orientations.end(), o) != orientations.end();
  }

  friend bool operator==(const PlantConfig&, const PlantConfig&) = default;
};

inline PlantConfig config_by_name(std::string_view n) {
  if (n == "full")
    return PlantConfig::full();
  if (n == "reduced1" || n == "reduced")
    return PlantConfig::reduced();
  throw ConfigError("unknown configuration preset '" + std::string(n) + "'");
}

// ---------------------------------------------------------------------------
// Actions

enum class ActionKind : std::uint8_t {
  skip,
  // external inputs (console / emergency buttons)
  gate_command,
  paddle_command,
  emergency_lock_command,
  barrier_command,
  emergency_barrier_command,
  entering_light_command,
  leaving_light_command,
  barrier_light_command,
  // actuator outputs
  gate_actuator,
  paddle_actuator,
  barrier_actuator,
  entering_light_actuator,
  leaving_light_actuator,
  barrier_light_actuator,
  // sensor inputs
  gate_sensor,
  paddle_sensor,
  barrier_sensor,
  water_sensor,
  entering_light_sensor,
  leaving_light_sensor,
  barrier_light_sensor,
};

inline constexpr std::size_t action_kind_count = 22;

/// Role of an action from the controller's point of view.
enum class ActionRole : std::uint8_t {
  skip,
  command, ///< console or emergency input
  sensor,  ///< spontaneous position / water sensor input
  read,    ///< light sensor, only ever read inline by a handler
  output,  ///< actuator instruction
};

struct KindInfo {
  std::string_view name;
  bool lock;
  bool side;
  bool orientation;
  ValueType value;
  ActionRole role;
  bool barrier; ///< only exists when the barrier is configured
};

inline constexpr std::array<KindInfo, action_kind_count> kind_table{{
    {"skip", false, false, false, ValueType::none, ActionRole::skip, false},
    {"GateCommand", true, true, false, ValueType::console_command, ActionRole::command, false},
    {"PaddleCommand", true, true, false, ValueType::console_command, ActionRole::command, false},
    {"EmergencyLockCommand", true, false, false, ValueType::emergency_command, ActionRole::command, false},
    {"BarrierCommand", false, false, false, ValueType::console_command, ActionRole::command, true},
    {"EmergencyBarrierCommand", false, false, false, ValueType::emergency_command, ActionRole::command, true},
    {"EnteringTrafficLightCommand", true, true, false, ValueType::double_light, ActionRole::command, false},
    {"LeavingTrafficLightCommand", true, true, false, ValueType::single_light, ActionRole::command, false},
    {"BarrierTrafficLightCommand", false, true, false, ValueType::single_light, ActionRole::command, true},
    {"GateActuator", true, true, true, ValueType::actuator_command, ActionRole::output, false},
    {"PaddleActuator", true, true, true, ValueType::actuator_command, ActionRole::output, false},
    {"BarrierActuator", false, false, false, ValueType::actuator_command, ActionRole::output, true},
    {"EnteringTrafficLightActuator", true, true, true, ValueType::double_light, ActionRole::output, false},
    {"LeavingTrafficLightActuator", true, true, true, ValueType::single_light, ActionRole::output, false},
    {"BarrierTrafficLightActuator", false, true, true, ValueType::single_light, ActionRole::output, true},
    {"GateSensor", true, true, true, ValueType::sensor_position, ActionRole::sensor, false},
    {"PaddleSensor", true, true, true, ValueType::sensor_position, ActionRole::sensor, false},
    {"BarrierSensor", false, false, false, ValueType::sensor_position, ActionRole::sensor, true},
    {"WaterSensor", true, true, false, ValueType::water_level, ActionRole::sensor, false},
    {"EnteringTrafficLightSensor", true, true, true, ValueType::double_light_status, ActionRole::read, false},
    {"LeavingTrafficLightSensor", true, true, true, ValueType::single_light_status, ActionRole::read, false},
    {"BarrierTrafficLightSensor", false, true, true, ValueType::single_light_status, ActionRole::read, true},
}};

constexpr const KindInfo& info(ActionKind k) noexcept { return kind_table[to_u8(k)]; }

/// Barrier lights stand at both ends of the barrier whatever orientations
/// the locks are configured with.
constexpr bool spans_all_orientations(ActionKind k) noexcept {
  return k == ActionKind::barrier_light_actuator || k == ActionKind::barrier_light_sensor;
}

inline const std::vector<Orientation>& all_orientations() {
  static const std::vector<Orientation> v{Orientation::east, Orientation::west};
  return v;
}

/// One input or output event of the controller. Arguments live in fixed
/// slots (lock, side, orientation, value); slots a kind does not carry are
/// zero.
struct Action {
  ActionKind kind = ActionKind::skip;
  LockId lock = LockId::north;
  StreamSide side = StreamSide::upstream;
  Orientation orientation = Orientation::east;
  std::uint8_t value = 0;

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;

  ActionRole role() const noexcept { return info(kind).role; }
  bool is_output() const noexcept { return role() == ActionRole::output; }
  bool is_input() const noexcept { return !is_output(); }
  bool is_read() const noexcept { return role() == ActionRole::read; }
  /// Inputs accepted only when the controller is stable (everything but reads).
  bool is_stable_input() const noexcept { return is_input() && !is_read(); }

  template <class E>
  E as() const noexcept {
    return static_cast<E>(value);
  }

  static Action skip() { return {}; }
  static Action gate_command(LockId l, StreamSide s, ConsoleCommand c) {
    return {ActionKind::gate_command, l, s, {}, to_u8(c)};
  }
  static Action paddle_command(LockId l, StreamSide s, ConsoleCommand c) {
    return {ActionKind::paddle_command, l, s, {}, to_u8(c)};
  }
  static Action emergency_lock_command(LockId l, EmergencyCommand c) {
    return {ActionKind::emergency_lock_command, l, {}, {}, to_u8(c)};
  }
  static Action barrier_command(ConsoleCommand c) { return {ActionKind::barrier_command, {}, {}, {}, to_u8(c)}; }
  static Action emergency_barrier_command(EmergencyCommand c) {
    return {ActionKind::emergency_barrier_command, {}, {}, {}, to_u8(c)};
  }
  static Action entering_light_command(LockId l, StreamSide s, DoubleLight c) {
    return {ActionKind::entering_light_command, l, s, {}, to_u8(c)};
  }
  static Action leaving_light_command(LockId l, StreamSide s, SingleLight c) {
    return {ActionKind::leaving_light_command, l, s, {}, to_u8(c)};
  }
  static Action barrier_light_command(StreamSide s, SingleLight c) {
    return {ActionKind::barrier_light_command, {}, s, {}, to_u8(c)};
  }
  static Action gate_actuator(LockId l, StreamSide s, Orientation o, ActuatorCommand c) {
    return {ActionKind::gate_actuator, l, s, o, to_u8(c)};
  }
  static Action paddle_actuator(LockId l, StreamSide s, Orientation o, ActuatorCommand c) {
    return {ActionKind::paddle_actuator, l, s, o, to_u8(c)};
  }
  static Action barrier_actuator(ActuatorCommand c) { return {ActionKind::barrier_actuator, {}, {}, {}, to_u8(c)}; }
  static Action entering_light_actuator(LockId l, StreamSide s, Orientation o, DoubleLight c) {
    return {ActionKind::entering_light_actuator, l, s, o, to_u8(c)};
  }
  static Action leaving_light_actuator(LockId l, StreamSide s, Orientation o, SingleLight c) {
    return {ActionKind::leaving_light_actuator, l, s, o, to_u8(c)};
  }
  static Action barrier_light_actuator(StreamSide s, Orientation o, SingleLight c) {
    return {ActionKind::barrier_light_actuator, {}, s, o, to_u8(c)};
  }
  static Action gate_sensor(LockId l, StreamSide s, Orientation o, SensorPosition p) {
    return {ActionKind::gate_sensor, l, s, o, to_u8(p)};
  }
  static Action paddle_sensor(LockId l, StreamSide s, Orientation o, SensorPosition p) {
    return {ActionKind::paddle_sensor, l, s, o, to_u8(p)};
  }
  static Action barrier_sensor(SensorPosition p) { return {ActionKind::barrier_sensor, {}, {}, {}, to_u8(p)}; }
  static Action water_sensor(LockId l, StreamSide s, WaterLevel w) {
    return {ActionKind::water_sensor, l, s, {}, to_u8(w)};
  }
  static Action entering_light_sensor(LockId l, StreamSide s, Orientation o, DoubleLightStatus c) {
    return {ActionKind::entering_light_sensor, l, s, o, to_u8(c)};
  }
  static Action leaving_light_sensor(LockId l, StreamSide s, Orientation o, SingleLightStatus c) {
    return {ActionKind::leaving_light_sensor, l, s, o, to_u8(c)};
  }
  static Action barrier_light_sensor(StreamSide s, Orientation o, SingleLightStatus c) {
    return {ActionKind::barrier_light_sensor, {}, s, o, to_u8(c)};
  }
};

/// Whether `a` is a well-typed action of the alphabet generated by `config`.
inline bool well_typed(const Action& a, const PlantConfig& config) {
  if (to_u8(a.kind) >= action_kind_count)
    return false;
  const KindInfo& k = info(a.kind);
  if (k.barrier && !config.include_barrier)
    return false;
  if (k.lock ? !config.has_lock(a.lock) : a.lock != LockId::north)
    return false;
  if (!k.side && a.side != StreamSide::upstream)
    return false;
  if (to_u8(a.side) > 1)
    return false;
  if (to_u8(a.orientation) > 1)
    return false;
  if (k.orientation ? !(spans_all_orientations(a.kind) || config.has_orientation(a.orientation))
                    : a.orientation != Orientation::east)
    return false;
  const std::size_t n = value_count(k.value);
  return n == 0 ? a.value == 0 : a.value < n;
}

/// Number of distinct argument tuples of `kind` under `config`.
inline std::uint64_t instances(const PlantConfig& config, ActionKind kind) {
  if (to_u8(kind) >= action_kind_count)
    throw InvalidAction("unknown action kind");
  const KindInfo& k = info(kind);
  if (k.barrier && !config.include_barrier)
    return 0;
  std::uint64_t n = 1;
  if (k.lock)
    n *= config.locks.size();
  if (k.side)
    n *= config.stream_sides.size();
  if (k.orientation)
    n *= spans_all_orientations(kind) ? 2 : config.orientations.size();
  if (k.value != ValueType::none)
    n *= value_count(k.value);
  return n;
}

// ---------------------------------------------------------------------------
// Textual syntax: GateActuator(north,upstream,east,do_open)

inline std::string to_string(const Action& a) {
  const KindInfo& k = info(a.kind);
  std::string out(k.name);
  if (a.kind == ActionKind::skip)
    return out;
  out += '(';
  bool first = true;
  auto arg = [&](std::string_view s) {
    if (!first)
      out += ',';
    out += s;
    first = false;
  };
  if (k.lock)
    arg(name(a.lock));
  if (k.side)
    arg(name(a.side));
  if (k.orientation)
    arg(name(a.orientation));
  if (k.value != ValueType::none)
    arg(value_names(k.value)[a.value]);
  out += ')';
  return out;
}

namespace detail {

template <std::size_t N>
int lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s)
      return static_cast<int>(i);
  return -1;
}

inline int lookup(std::span<const std::string_view> names, std::string_view s) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == s)
      return static_cast<int>(i);
  return -1;
}

/// Splits "a,show(b),c" on top-level commas.
inline std::vector<std::string_view> split_args(std::string_view s) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(')
      ++depth;
    else if (s[i] == ')')
      --depth;
    else if (s[i] == ',' && depth == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

} // namespace detail

inline Action parse_action(std::string_view text) {
  auto fail = [&](const char* why) { return ParseError("bad action '" + std::string(text) + "': " + why); };
  if (text == "skip")
    return Action::skip();
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.empty() || text.back() != ')')
    throw fail("expected Name(args)");
  const std::string_view kind_name = text.substr(0, open);
  int kind = -1;
  for (std::size_t i = 1; i < action_kind_count; ++i)
    if (kind_table[i].name == kind_name)
      kind = static_cast<int>(i);
  if (kind < 0)
    throw fail("unknown action name");
  Action a;
  a.kind = static_cast<ActionKind>(kind);
  const KindInfo& k = info(a.kind);
  const auto args = detail::split_args(text.substr(open + 1, text.size() - open - 2));
  const std::size_t expected = k.lock + k.side + k.orientation + (k.value != ValueType::none);
  if (args.size() != expected)
    throw fail("wrong number of arguments");
  std::size_t i = 0;
  if (k.lock) {
    const int v = detail::lookup(detail::lock_names, args[i++]);
    if (v < 0)
      throw fail("bad lock");
    a.lock = static_cast<LockId>(v);
  }
  if (k.side) {
    const int v = detail::lookup(detail::side_names, args[i++]);
    if (v < 0)
      throw fail("bad stream side");
    a.side = static_cast<StreamSide>(v);
  }
  if (k.orientation) {
    const int v = detail::lookup(detail::orientation_names, args[i++]);
    if (v < 0)
      throw fail("bad orientation");
    a.orientation = static_cast<Orientation>(v);
  }
  if (k.value != ValueType::none) {
    const int v = detail::lookup(value_names(k.value), args[i++]);
    if (v < 0)
      throw fail("bad value");
    a.value = static_cast<std::uint8_t>(v);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Dense encoding

/// Bijection between the actions of a configuration and [0, size()).
/// Skip is always code 0; kinds follow in ActionKind order, arguments in
/// mixed radix (lock, side, orientation, value).
class Alphabet {
public:
  explicit Alphabet(PlantConfig config) : config_(std::move(config)) {
    config_.validate();
    lock_index_.fill(-1);
    orientation_index_.fill(-1);
    for (std::size_t i = 0; i < config_.locks.size(); ++i)
      lock_index_[to_u8(config_.locks[i])] = static_cast<int>(i);
    for (std::size_t i = 0; i < config_.orientations.size(); ++i)
      orientation_index_[to_u8(config_.orientations[i])] = static_cast<int>(i);
    std::uint32_t offset = 0;
    for (std::size_t k = 0; k < action_kind_count; ++k) {
      offset_[k] = offset;
      count_[k] = static_cast<std::uint32_t>(marijke::instances(config_, static_cast<ActionKind>(k)));
      offset += count_[k];
    }
    actions_.reserve(offset);
    for (std::size_t k = 0; k < action_kind_count; ++k)
      enumerate_kind(static_cast<ActionKind>(k), actions_);
  }

  const PlantConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return actions_.size(); }
  const std::vector<Action>& actions() const noexcept { return actions_; }
  std::uint64_t instances(ActionKind k) const noexcept { return count_[to_u8(k)]; }
  std::uint32_t offset(ActionKind k) const noexcept { return offset_[to_u8(k)]; }

  static constexpr std::uint32_t skip_code = 0;

  bool contains(const Action& a) const noexcept { return well_typed(a, config_); }

  std::uint32_t encode(const Action& a) const {
    if (!contains(a))
      throw InvalidAction("action not in alphabet: " + to_string(a));
    return encode_unchecked(a);
  }

  std::uint32_t encode_unchecked(const Action& a) const noexcept {
    const KindInfo& k = info(a.kind);
    std::uint32_t idx = 0;
    if (k.lock)
      idx = static_cast<std::uint32_t>(lock_index_[to_u8(a.lock)]);
    if (k.side)
      idx = idx * 2 + to_u8(a.side);
    if (k.orientation) {
      if (spans_all_orientations(a.kind))
        idx = idx * 2 + to_u8(a.orientation);
      else
        idx = idx * static_cast<std::uint32_t>(config_.orientations.size()) +
              static_cast<std::uint32_t>(orientation_index_[to_u8(a.orientation)]);
    }
    if (k.value != ValueType::none)
      idx = idx * static_cast<std::uint32_t>(value_count(k.value)) + a.value;
    return offset_[to_u8(a.kind)] + idx;
  }

  const Action& decode(std::uint32_t code) const {
    if (code >= actions_.size())
      throw InvalidAction("action code out of range: " + std::to_string(code));
    return actions_[code];
  }

private:
  void enumerate_kind(ActionKind kind, std::vector<Action>& out) const {
    const KindInfo& k = info(kind);
    if (k.barrier && !config_.include_barrier)
      return;
    const std::vector<LockId> locks = k.lock ? config_.locks : std::vector<LockId>{LockId::north};
    const std::vector<StreamSide> sides =
        k.side ? config_.stream_sides : std::vector<StreamSide>{StreamSide::upstream};
    const std::vector<Orientation> orients = !k.orientation                ? std::vector<Orientation>{Orientation::east}
                                             : spans_all_orientations(kind) ? all_orientations()
                                                                            : config_.orientations;
    const std::size_t nv = k.value == ValueType::none ? 1 : value_count(k.value);
    for (LockId l : locks)
      for (StreamSide s : sides)
        for (Orientation o : orients)
          for (std::size_t v = 0; v < nv; ++v)
            out.push_back(Action{kind, l, s, o, static_cast<std::uint8_t>(v)});
  }

  PlantConfig config_;
  std::array<int, 2> lock_index_{};
  std::array<int, 2> orientation_index_{};
  std::array<std::uint32_t, action_kind_count> offset_{};
  std::array<std::uint32_t, action_kind_count> count_{};
  std::vector<Action> actions_;
};

} // namespace marijke
