#pragma once

// Physical model of the lock complex.
//
// Devices move one position unit per tick between 0 (closed) and P (open).
// Each lock chamber has an integer water level that relaxes toward the
// upstream or downstream level while a gate or paddle on that side is not
// closed. Sensors report edge-triggered events at end positions and water
// level crossings, plus a heartbeat of every sensor every H ticks.

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "marijke/domain.hpp"
#include "marijke/error.hpp"

namespace marijke {

inline constexpr int plant_travel = 10;    ///< P: ticks from closed to open
inline constexpr int plant_heartbeat = 25; ///< H: ticks between sensor re-reports
inline constexpr int water_upstream = 6;
inline constexpr int water_downstream = 0;
inline constexpr int water_chamber_initial = 3;

enum class Motion : std::uint8_t { still, opening, closing };

inline std::string_view name(Motion m) {
  static constexpr std::array<std::string_view, 3> names{"still", "opening", "closing"};
  return names[to_u8(m)];
}

struct Device {
  int position = 0;
  Motion motion = Motion::still;
  friend bool operator==(const Device&, const Device&) = default;
};

// ---------------------------------------------------------------------------
// Faults

enum class TargetKind : std::uint8_t { gate, paddle, barrier, water, entering_light, leaving_light, barrier_light };

inline constexpr std::array<std::string_view, 7> target_kind_names{
    "gate", "paddle", "barrier", "water", "entering_light", "leaving_light", "barrier_light"};

/// A device, sensor or light of the plant.
struct FaultTarget {
  TargetKind kind = TargetKind::gate;
  LockId lock = LockId::north;
  StreamSide side = StreamSide::upstream;
  Orientation orientation = Orientation::east;

  friend auto operator<=>(const FaultTarget&, const FaultTarget&) = default;
  friend bool operator==(const FaultTarget&, const FaultTarget&) = default;

  bool has_lock() const { return kind != TargetKind::barrier && kind != TargetKind::barrier_light; }
  bool has_side() const { return kind != TargetKind::barrier; }
  bool has_orientation() const { return kind != TargetKind::barrier && kind != TargetKind::water; }
};

inline std::string to_string(const FaultTarget& t) {
  std::string out(target_kind_names[to_u8(t.kind)]);
  if (t.kind == TargetKind::barrier)
    return out;
  out += '(';
  if (t.has_lock())
    out += std::string(name(t.lock)) + ",";
  out += std::string(name(t.side));
  if (t.has_orientation())
    out += "," + std::string(name(t.orientation));
  return out + ')';
}

enum class FaultKind : std::uint8_t { sensor_fail, stuck_aspect, motor_stall };

struct Fault {
  FaultKind kind = FaultKind::sensor_fail;
  std::uint8_t aspect = 0; ///< stuck_aspect: DoubleLight or SingleLight value
  friend bool operator==(const Fault&, const Fault&) = default;
};

inline std::string to_string(const Fault& f, TargetKind target) {
  switch (f.kind) {
  case FaultKind::sensor_fail: return "sensor_fail";
  case FaultKind::motor_stall: return "motor_stall";
  case FaultKind::stuck_aspect:
    return "stuck_aspect(" +
           std::string(target == TargetKind::entering_light ? name(static_cast<DoubleLight>(f.aspect))
                                                            : name(static_cast<SingleLight>(f.aspect))) +
           ")";
  }
  return {};
}

namespace plant_detail {

inline std::vector<std::string_view> args_of(std::string_view text, std::string_view& head) {
  const std::size_t open = text.find('(');
  if (open == std::string_view::npos) {
    head = text;
    return {};
  }
  if (text.back() != ')')
    throw ParseError("missing ')' in '" + std::string(text) + "'");
  head = text.substr(0, open);
  return detail::split_args(text.substr(open + 1, text.size() - open - 2));
}

template <class E, std::size_t N>
E lookup_or_throw(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s)
      return static_cast<E>(i);
  throw ParseError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

} // namespace plant_detail

inline FaultTarget parse_fault_target(std::string_view text) {
  std::string_view head;
  const auto args = plant_detail::args_of(text, head);
  FaultTarget t;
  t.kind = plant_detail::lookup_or_throw<TargetKind>(target_kind_names, head, "fault target");
  const std::size_t want = (t.has_lock() ? 1 : 0) + (t.has_side() ? 1 : 0) + (t.has_orientation() ? 1 : 0);
  if (args.size() != want)
    throw ParseError("fault target '" + std::string(text) + "' needs " + std::to_string(want) + " arguments");
  std::size_t i = 0;
  if (t.has_lock())
    t.lock = plant_detail::lookup_or_throw<LockId>(detail::lock_names, args[i++], "lock");
  if (t.has_side())
    t.side = plant_detail::lookup_or_throw<StreamSide>(detail::side_names, args[i++], "stream side");
  if (t.has_orientation())
    t.orientation = plant_detail::lookup_or_throw<Orientation>(detail::orientation_names, args[i++], "orientation");
  return t;
}

inline Fault parse_fault(std::string_view text, TargetKind target) {
  std::string_view head;
  const auto args = plant_detail::args_of(text, head);
  Fault f;
  if (head == "sensor_fail" && args.empty())
    f.kind = FaultKind::sensor_fail;
  else if (head == "motor_stall" && args.empty())
    f.kind = FaultKind::motor_stall;
  else if (head == "stuck_aspect" && args.size() == 1) {
    f.kind = FaultKind::stuck_aspect;
    if (target == TargetKind::entering_light)
      f.aspect = to_u8(plant_detail::lookup_or_throw<DoubleLight>(detail::double_light_names, args[0], "aspect"));
    else
      f.aspect = to_u8(plant_detail::lookup_or_throw<SingleLight>(detail::single_light_names, args[0], "aspect"));
  } else
    throw ParseError("unknown fault '" + std::string(text) + "'");
  return f;
}

// ---------------------------------------------------------------------------
// Random faults

/// Per-tick probabilities of a fresh fault on each healthy target, and of a
/// random operator command in closed-loop runs. The default injects nothing.
struct FaultProfile {
  double sensor_fail = 0;
  double stuck_aspect = 0;
  double motor_stall = 0;
  double command_rate = 0;

  bool quiet() const { return sensor_fail == 0 && stuck_aspect == 0 && motor_stall == 0; }

  void validate() const {
    for (double p : {sensor_fail, stuck_aspect, motor_stall, command_rate})
      if (!(p >= 0 && p <= 1))
        throw ConfigError("fault profile: probabilities must lie in [0, 1]");
  }
  friend bool operator==(const FaultProfile&, const FaultProfile&) = default;
};

// ---------------------------------------------------------------------------
// Plant

class Plant {
public:
  explicit Plant(PlantConfig config, FaultProfile profile = {}, std::uint64_t seed = 0)
      : config_(std::move(config)), profile_(profile), rng_(seed) {
    config_.validate();
    profile_.validate();
    barrier_.position = plant_travel;
    entering_.fill(DoubleLight::single_red);
    leaving_.fill(SingleLight::red);
    barrier_lights_.fill(SingleLight::red);
    chamber_.fill(water_chamber_initial);
    for (LockId l : config_.locks)
      for (StreamSide s : config_.stream_sides)
        water_reported_[pair_of(l, s)] = differential(l, s) == 0;
  }

  const PlantConfig& config() const noexcept { return config_; }
  const FaultProfile& profile() const noexcept { return profile_; }
  std::uint64_t tick_count() const noexcept { return ticks_; }

  /// Every fault target of the configuration, in a fixed order.
  std::vector<FaultTarget> targets() const {
    std::vector<FaultTarget> out;
    if (config_.include_barrier)
      out.push_back({TargetKind::barrier});
    for (TargetKind k : {TargetKind::gate, TargetKind::paddle, TargetKind::entering_light, TargetKind::leaving_light})
      for (LockId l : config_.locks)
        for (StreamSide s : config_.stream_sides)
          for (Orientation o : config_.orientations)
            out.push_back({k, l, s, o});
    for (LockId l : config_.locks)
      for (StreamSide s : config_.stream_sides)
        out.push_back({TargetKind::water, l, s});
    if (config_.include_barrier)
      for (StreamSide s : config_.stream_sides)
        for (Orientation o : {Orientation::east, Orientation::west})
          out.push_back({TargetKind::barrier_light, LockId::north, s, o});
    return out;
  }

  const Device& gate(LockId l, StreamSide s, Orientation o) const { return gates_[device_of(l, s, o)]; }
  const Device& paddle(LockId l, StreamSide s, Orientation o) const { return paddles_[device_of(l, s, o)]; }
  const Device& barrier() const { return barrier_; }
  DoubleLight entering(LockId l, StreamSide s, Orientation o) const { return entering_[device_of(l, s, o)]; }
  SingleLight leaving(LockId l, StreamSide s, Orientation o) const { return leaving_[device_of(l, s, o)]; }
  SingleLight barrier_light(StreamSide s, Orientation o) const { return barrier_lights_[to_u8(s) * 2 + to_u8(o)]; }
  int chamber(LockId l) const { return chamber_[to_u8(l)]; }
  /// Absolute water level difference across the gates at (l, s).
  int differential(LockId l, StreamSide s) const {
    const int outside = s == StreamSide::upstream ? water_upstream : water_downstream;
    return std::abs(chamber_[to_u8(l)] - outside);
  }

  const std::map<FaultTarget, Fault>& faults() const noexcept { return faults_; }

  /// Adds or removes a fault. Adding an identical fault again is a no-op;
  /// adding a different fault to a faulted target is an error.
  void inject_fault(const FaultTarget& t, const Fault& f, bool on = true) {
    check_target(t);
    if (!on) {
      faults_.erase(t);
      return;
    }
    const bool device = t.kind == TargetKind::gate || t.kind == TargetKind::paddle || t.kind == TargetKind::barrier;
    const bool light = t.kind == TargetKind::entering_light || t.kind == TargetKind::leaving_light ||
                       t.kind == TargetKind::barrier_light;
    if (f.kind == FaultKind::motor_stall && !device)
      throw FaultError("motor_stall needs a gate, paddle or barrier");
    if (f.kind == FaultKind::stuck_aspect && !light)
      throw FaultError("stuck_aspect needs a light");
    if (f.kind == FaultKind::stuck_aspect && t.kind != TargetKind::entering_light && f.aspect > 1)
      throw FaultError("single light aspect out of range");
    if (auto it = faults_.find(t); it != faults_.end()) {
      if (it->second == f)
        return;
      throw FaultError("target " + to_string(t) + " already has fault " + to_string(it->second, t.kind));
    }
    faults_[t] = f;
    if (f.kind == FaultKind::motor_stall)
      device_ref(t).motion = Motion::still;
    if (f.kind == FaultKind::stuck_aspect)
      set_aspect(t, f.aspect);
  }
  void clear_fault(const FaultTarget& t) { inject_fault(t, {}, false); }

  /// Applies an actuator instruction.
  void apply(const Action& out) {
    if (!out.is_output())
      throw InvalidAction("plant only accepts actuator outputs, got " + to_string(out));
    if (!well_typed(out, config_))
      throw InvalidAction("actuator outside the configuration: " + to_string(out));
    switch (out.kind) {
    case ActionKind::gate_actuator:
      actuate({TargetKind::gate, out.lock, out.side, out.orientation}, out.as<ActuatorCommand>());
      break;
    case ActionKind::paddle_actuator:
      actuate({TargetKind::paddle, out.lock, out.side, out.orientation}, out.as<ActuatorCommand>());
      break;
    case ActionKind::barrier_actuator: actuate({TargetKind::barrier}, out.as<ActuatorCommand>()); break;
    case ActionKind::entering_light_actuator:
      light({TargetKind::entering_light, out.lock, out.side, out.orientation}, out.value);
      break;
    case ActionKind::leaving_light_actuator:
      light({TargetKind::leaving_light, out.lock, out.side, out.orientation}, out.value);
      break;
    case ActionKind::barrier_light_actuator:
      light({TargetKind::barrier_light, LockId::north, out.side, out.orientation}, out.value);
      break;
    default: break;
    }
  }

  /// Answers an inline light read (value slot ignored).
  Action respond(const Action& read) const {
    if (!read.is_read() || !well_typed(read, config_))
      throw InvalidAction("not a configured light sensor read: " + to_string(read));
    Action r = read;
    switch (read.kind) {
    case ActionKind::entering_light_sensor: {
      const FaultTarget t{TargetKind::entering_light, read.lock, read.side, read.orientation};
      r.value = sensor_failed(t) ? to_u8(DoubleLightStatus::fail_double)
                                 : to_u8(show(entering(read.lock, read.side, read.orientation)));
      break;
    }
    case ActionKind::leaving_light_sensor: {
      const FaultTarget t{TargetKind::leaving_light, read.lock, read.side, read.orientation};
      r.value = sensor_failed(t) ? to_u8(SingleLightStatus::fail_single)
                                 : to_u8(show(leaving(read.lock, read.side, read.orientation)));
      break;
    }
    default: {
      const FaultTarget t{TargetKind::barrier_light, LockId::north, read.side, read.orientation};
      r.value = sensor_failed(t) ? to_u8(SingleLightStatus::fail_single)
                                 : to_u8(show(barrier_light(read.side, read.orientation)));
      break;
    }
    }
    return r;
  }

  /// Advances one tick; returns the spontaneous sensor events in a fixed
  /// order (barrier, gates, paddles, water).
  std::vector<Action> tick() {
    ++ticks_;
    if (!profile_.quiet())
      random_faults();
    std::vector<Action> events;
    const bool heartbeat = ticks_ % plant_heartbeat == 0;
    auto move = [&](Device& d, const FaultTarget& t, auto make) {
      const int before = d.position;
      if (d.motion == Motion::opening && d.position < plant_travel)
        ++d.position;
      else if (d.motion == Motion::closing && d.position > 0)
        --d.position;
      const bool arrived = d.position != before && (d.position == 0 || d.position == plant_travel);
      if (arrived)
        d.motion = Motion::still;
      if (arrived || heartbeat)
        events.push_back(make(sensed(d, t)));
    };
    if (config_.include_barrier)
      move(barrier_, {TargetKind::barrier}, [](SensorPosition p) { return Action::barrier_sensor(p); });
    for (TargetKind k : {TargetKind::gate, TargetKind::paddle})
      for (LockId l : config_.locks)
        for (StreamSide s : config_.stream_sides)
          for (Orientation o : config_.orientations) {
            const FaultTarget t{k, l, s, o};
            move(device_ref(t), t, [&](SensorPosition p) {
              return k == TargetKind::gate ? Action::gate_sensor(l, s, o, p) : Action::paddle_sensor(l, s, o, p);
            });
          }
    for (LockId l : config_.locks) {
      int& c = chamber_[to_u8(l)];
      for (StreamSide s : config_.stream_sides) {
        const int target = s == StreamSide::upstream ? water_upstream : water_downstream;
        int open = 0;
        for (Orientation o : config_.orientations)
          open += (gate(l, s, o).position > 0) + (paddle(l, s, o).position > 0);
        for (int i = 0; i < open && c != target; ++i)
          c += c < target ? 1 : -1;
      }
      for (StreamSide s : config_.stream_sides) {
        const bool equal = differential(l, s) == 0;
        const bool changed = equal != water_reported_[pair_of(l, s)];
        water_reported_[pair_of(l, s)] = equal;
        if (changed || heartbeat) {
          const bool failed = sensor_failed({TargetKind::water, l, s});
          events.push_back(Action::water_sensor(
              l, s, failed ? WaterLevel::fail_water_sensor : equal ? WaterLevel::equal : WaterLevel::unequal));
        }
      }
    }
    return events;
  }

  /// Physical state equality (the random source is not compared).
  friend bool operator==(const Plant& a, const Plant& b) {
    return a.config_ == b.config_ && a.gates_ == b.gates_ && a.paddles_ == b.paddles_ && a.barrier_ == b.barrier_ &&
           a.entering_ == b.entering_ && a.leaving_ == b.leaving_ && a.barrier_lights_ == b.barrier_lights_ &&
           a.chamber_ == b.chamber_ && a.faults_ == b.faults_ && a.ticks_ == b.ticks_;
  }

private:
  static std::size_t device_of(LockId l, StreamSide s, Orientation o) {
    return (to_u8(l) * 2u + to_u8(s)) * 2u + to_u8(o);
  }
  static std::size_t pair_of(LockId l, StreamSide s) { return to_u8(l) * 2u + to_u8(s); }

  void check_target(const FaultTarget& t) const {
    const bool barrier = t.kind == TargetKind::barrier || t.kind == TargetKind::barrier_light;
    if (barrier && !config_.include_barrier)
      throw FaultError("no barrier in this configuration");
    if (t.has_lock() && !config_.has_lock(t.lock))
      throw FaultError("lock " + std::string(name(t.lock)) + " is not configured");
    if (t.has_orientation() && t.kind != TargetKind::barrier_light && !config_.has_orientation(t.orientation))
      throw FaultError("orientation " + std::string(name(t.orientation)) + " is not configured");
  }

  Device& device_ref(const FaultTarget& t) {
    switch (t.kind) {
    case TargetKind::gate: return gates_[device_of(t.lock, t.side, t.orientation)];
    case TargetKind::paddle: return paddles_[device_of(t.lock, t.side, t.orientation)];
    default: return barrier_;
    }
  }

  bool has_fault(const FaultTarget& t, FaultKind k) const {
    auto it = faults_.find(t);
    return it != faults_.end() && it->second.kind == k;
  }
  bool sensor_failed(const FaultTarget& t) const { return has_fault(t, FaultKind::sensor_fail); }

  SensorPosition sensed(const Device& d, const FaultTarget& t) const {
    if (sensor_failed(t))
      return SensorPosition::fail_position;
    if (d.position == 0)
      return SensorPosition::sense_closed;
    if (d.position == plant_travel)
      return SensorPosition::sense_open;
    return SensorPosition::sense_intermediate;
  }

  void random_faults() {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (const FaultTarget& t : targets()) {
      const bool light = t.kind == TargetKind::entering_light || t.kind == TargetKind::leaving_light ||
                         t.kind == TargetKind::barrier_light;
      const bool device = t.kind == TargetKind::gate || t.kind == TargetKind::paddle || t.kind == TargetKind::barrier;
      // One draw per candidate kind keeps the random stream independent of
      // which targets are already faulted.
      const double a = coin(rng_), b = coin(rng_);
      const std::uint64_t aspect_draw = rng_();
      if (faults_.count(t))
        continue;
      if (a < profile_.sensor_fail)
        inject_fault(t, {FaultKind::sensor_fail, 0});
      else if (light && b < profile_.stuck_aspect)
        inject_fault(t, {FaultKind::stuck_aspect,
                         static_cast<std::uint8_t>(aspect_draw % (t.kind == TargetKind::entering_light ? 4 : 2))});
      else if (device && b < profile_.motor_stall)
        inject_fault(t, {FaultKind::motor_stall, 0});
    }
  }

  void actuate(const FaultTarget& t, ActuatorCommand c) {
    Device& d = device_ref(t);
    switch (c) {
    case ActuatorCommand::do_open:
    case ActuatorCommand::do_close:
      if (!has_fault(t, FaultKind::motor_stall))
        d.motion = c == ActuatorCommand::do_open ? Motion::opening : Motion::closing;
      break;
    default: d.motion = Motion::still; break;
    }
  }

  void light(const FaultTarget& t, std::uint8_t aspect) {
    if (has_fault(t, FaultKind::stuck_aspect))
      return;
    set_aspect(t, aspect);
  }

  void set_aspect(const FaultTarget& t, std::uint8_t aspect) {
    switch (t.kind) {
    case TargetKind::entering_light:
      entering_[device_of(t.lock, t.side, t.orientation)] = static_cast<DoubleLight>(aspect);
      break;
    case TargetKind::leaving_light:
      leaving_[device_of(t.lock, t.side, t.orientation)] = static_cast<SingleLight>(aspect);
      break;
    default: barrier_lights_[to_u8(t.side) * 2 + to_u8(t.orientation)] = static_cast<SingleLight>(aspect); break;
    }
  }

  PlantConfig config_;
  FaultProfile profile_;
  std::mt19937_64 rng_;
  std::array<Device, 8> gates_{};
  std::array<Device, 8> paddles_{};
  Device barrier_{};
  std::array<DoubleLight, 8> entering_{};
  std::array<SingleLight, 8> leaving_{};
  std::array<SingleLight, 4> barrier_lights_{};
  std::array<int, 2> chamber_{};
  std::array<bool, 4> water_reported_{};
  std::map<FaultTarget, Fault> faults_;
  std::uint64_t ticks_ = 0;
};

} // namespace marijke
