#pragma once

// Controller and plant coupled in a loop, scenario files, and the seeded
// random walk used for statistical runs.
//
// Scenario line: <tick> <event>
//   <event> is an input action, inject(<target>,<fault>) or clear(<target>).
// Events scheduled for tick t run before the plant advances from t to t+1.
// Optional header directives fix the run settings:
//   #! config <preset>
//   #! seed <n>
//   #! profile <sensor_fail> <stuck_aspect> <motor_stall> <command_rate>
// Other lines starting with '#' are comments.

#include <algorithm>
#include <functional>
#include <istream>
#include <optional>
#include <random>
#include <sstream>

#include "marijke/controller.hpp"
#include "marijke/plant.hpp"
#include "marijke/trace.hpp"

namespace marijke {

struct ScenarioEvent {
  enum class Kind : std::uint8_t { input, inject, clear };

  std::uint64_t tick = 0;
  Kind kind = Kind::input;
  Action action{};
  FaultTarget target{};
  Fault fault{};

  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

inline std::string to_string(const ScenarioEvent& e) {
  std::string out = std::to_string(e.tick) + " ";
  switch (e.kind) {
  case ScenarioEvent::Kind::input: return out + to_string(e.action);
  case ScenarioEvent::Kind::inject:
    return out + "inject(" + to_string(e.target) + "," + to_string(e.fault, e.target.kind) + ")";
  case ScenarioEvent::Kind::clear: return out + "clear(" + to_string(e.target) + ")";
  }
  return out;
}

inline ScenarioEvent parse_scenario_event(std::string_view text) {
  const std::size_t sp = text.find(' ');
  if (sp == std::string_view::npos)
    throw ParseError("expected '<tick> <event>'");
  ScenarioEvent e;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + sp, e.tick);
  if (ec != std::errc() || ptr != text.data() + sp)
    throw ParseError("bad tick '" + std::string(text.substr(0, sp)) + "'");
  std::string_view body = text.substr(sp + 1);
  while (!body.empty() && body.front() == ' ')
    body.remove_prefix(1);
  std::string_view head;
  if (body.starts_with("inject(") || body.starts_with("clear(")) {
    const auto args = plant_detail::args_of(body, head);
    if (head == "inject") {
      if (args.size() != 2)
        throw ParseError("inject takes a target and a fault");
      e.kind = ScenarioEvent::Kind::inject;
      e.target = parse_fault_target(args[0]);
      e.fault = parse_fault(args[1], e.target.kind);
    } else {
      if (args.size() != 1)
        throw ParseError("clear takes a target");
      e.kind = ScenarioEvent::Kind::clear;
      e.target = parse_fault_target(args[0]);
    }
    return e;
  }
  e.action = parse_action(body);
  if (!e.action.is_stable_input())
    throw ParseError("scenario action must be a command or sensor event: " + std::string(body));
  return e;
}

/// Settings given by scenario header directives.
struct ScenarioHeader {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<FaultProfile> profile;
  friend bool operator==(const ScenarioHeader&, const ScenarioHeader&) = default;
};

struct Scenario {
  ScenarioHeader header;
  std::vector<ScenarioEvent> events; ///< in tick order, file order kept within a tick
};

inline void write_scenario_header(std::ostream& out, const ScenarioHeader& h) {
  if (h.config)
    out << "#! config " << *h.config << '\n';
  if (h.seed)
    out << "#! seed " << *h.seed << '\n';
  if (h.profile)
    out << "#! profile " << h.profile->sensor_fail << ' ' << h.profile->stuck_aspect << ' ' << h.profile->motor_stall
        << ' ' << h.profile->command_rate << '\n';
}

namespace scenario_detail {

inline void directive(ScenarioHeader& h, const std::string& line) {
  std::istringstream in(line.substr(2));
  std::string key;
  in >> key;
  if (key == "config") {
    std::string name;
    if (!(in >> name))
      throw ParseError("config directive needs a preset name");
    h.config = name;
  } else if (key == "seed") {
    std::uint64_t seed = 0;
    if (!(in >> seed))
      throw ParseError("seed directive needs a number");
    h.seed = seed;
  } else if (key == "profile") {
    FaultProfile p;
    if (!(in >> p.sensor_fail >> p.stuck_aspect >> p.motor_stall >> p.command_rate))
      throw ParseError("profile directive needs four probabilities");
    h.profile = p;
  } else {
    throw ParseError("unknown directive '" + key + "'");
  }
  std::string rest;
  if (in >> rest)
    throw ParseError("trailing text after directive");
}

} // namespace scenario_detail

inline Scenario read_scenario_file(std::istream& in) {
  Scenario sc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    try {
      if (line.starts_with("#!"))
        scenario_detail::directive(sc.header, line);
      else if (!line.empty() && line[0] != '#')
        sc.events.push_back(parse_scenario_event(line));
    } catch (const ParseError& e) {
      throw ParseError("scenario line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ParseError("scenario line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (sc.header.profile)
    sc.header.profile->validate();
  std::stable_sort(sc.events.begin(), sc.events.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; });
  return sc;
}

/// Parses the events of a scenario file; returned in tick order, file order
/// kept within a tick.
inline std::vector<ScenarioEvent> read_scenario(std::istream& in) { return read_scenario_file(in).events; }

inline std::vector<ScenarioEvent> parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return read_scenario(in);
}

// ---------------------------------------------------------------------------

/// Controller driving the plant. Every stable input runs a complete burst;
/// reads are answered by the plant and outputs are applied as they are
/// emitted. All actions are appended to the trace and fed to the checker.
class ClosedLoop {
public:
  using Observer = std::function<void(std::uint64_t seq, const Action&)>;
  using ViolationObserver = std::function<void(const Violation&)>;

  ClosedLoop(const PlantConfig& config, MutationSet mutations = {}, std::vector<const Requirement*> reqs = {},
             FaultProfile profile = {}, std::uint64_t seed = 0)
      : controller_(config, mutations), plant_(config, profile, seed), state_(controller_.initial_state()),
        checker_(config, std::move(reqs)), rng_(seed ^ 0x5eed5eed5eed5eedull) {
    for (const Action& a : controller_.stable_inputs())
      if (a.role() == ActionRole::command)
        commands_.push_back(a);
  }

  const Controller& controller() const noexcept { return controller_; }
  const Plant& plant() const noexcept { return plant_; }
  const ControllerState& state() const noexcept { return state_; }
  const std::vector<Action>& trace() const noexcept { return trace_; }
  const TraceChecker& checker() const noexcept { return checker_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

  void set_observer(Observer o) { observer_ = std::move(o); }
  /// Called as soon as a monitor fires, right after the offending action.
  void set_violation_observer(ViolationObserver o) { on_violation_ = std::move(o); }
  /// Keep only the checker state, not the trace itself.
  void set_record_trace(bool on) { record_ = on; }

  /// Runs one burst for a command or sensor event.
  std::vector<Violation> input(const Action& a) {
    if (!a.is_stable_input() || !controller_.alphabet().contains(a))
      throw InvalidAction("not an input of this configuration: " + to_string(a));
    std::vector<Violation> fresh;
    state_ = controller_.step(state_, a);
    record(a, fresh);
    while (!state_.is_stable()) {
      Action next;
      if (state_.tag() == ModeTag::awaiting)
        next = plant_.respond(controller_.head_read(state_));
      else {
        next = controller_.head_output(state_);
        plant_.apply(next);
      }
      state_ = controller_.step_unchecked(state_, next);
      record(next, fresh);
    }
    return fresh;
  }

  /// Issues a random operator command (at the profile's command rate), then
  /// advances the plant by one tick and feeds its sensor events.
  std::vector<Violation> tick() {
    std::vector<Violation> fresh;
    const double rate = plant_.profile().command_rate;
    if (rate > 0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < rate)
      fresh = input(commands_[rng_() % commands_.size()]);
    for (const Action& e : plant_.tick()) {
      auto v = input(e);
      fresh.insert(fresh.end(), v.begin(), v.end());
    }
    return fresh;
  }

  void inject(const FaultTarget& t, const Fault& f) { plant_.inject_fault(t, f); }
  void clear(const FaultTarget& t) { plant_.clear_fault(t); }

  std::vector<Violation> apply(const ScenarioEvent& e) {
    switch (e.kind) {
    case ScenarioEvent::Kind::input: return input(e.action);
    case ScenarioEvent::Kind::inject: inject(e.target, e.fault); break;
    case ScenarioEvent::Kind::clear: clear(e.target); break;
    }
    return {};
  }

  /// Runs `ticks` plant ticks, applying scenario events at their ticks.
  /// Events scheduled at or after `ticks` are not applied.
  std::vector<Violation> run(const std::vector<ScenarioEvent>& events, std::uint64_t ticks) {
    std::vector<Violation> fresh;
    auto take = [&](std::vector<Violation> v) { fresh.insert(fresh.end(), v.begin(), v.end()); };
    std::size_t next = 0;
    while (next < events.size() && events[next].tick < plant_.tick_count())
      ++next;
    const std::uint64_t end = plant_.tick_count() + ticks;
    while (plant_.tick_count() < end) {
      while (next < events.size() && events[next].tick == plant_.tick_count())
        take(apply(events[next++]));
      take(tick());
    }
    return fresh;
  }

  std::uint64_t steps() const noexcept { return seq_; }

private:
  void record(const Action& a, std::vector<Violation>& fresh) {
    if (record_)
      trace_.push_back(a);
    if (observer_)
      observer_(seq_, a);
    ++seq_;
    for (Violation& v : checker_.feed(a)) {
      if (on_violation_)
        on_violation_(v);
      violations_.push_back(v);
      fresh.push_back(std::move(v));
    }
  }

  Controller controller_;
  Plant plant_;
  ControllerState state_;
  TraceChecker checker_;
  std::vector<Action> trace_;
  std::vector<Violation> violations_;
  Observer observer_;
  ViolationObserver on_violation_;
  bool record_ = true;
  std::uint64_t seq_ = 0;
  std::mt19937_64 rng_;
  std::vector<Action> commands_;
};

// ---------------------------------------------------------------------------

/// Uniform random walk over the controller LTS: a random stable input, a
/// random value for each awaited read, outputs as emitted.
class RandomWalk {
public:
  RandomWalk(const Controller& controller, std::uint64_t seed)
      : controller_(controller), state_(controller.initial_state()), rng_(seed) {}

  const ControllerState& state() const noexcept { return state_; }

  Action step() {
    Action a;
    switch (state_.tag()) {
    case ModeTag::stable: {
      const auto& inputs = controller_.stable_inputs();
      a = inputs[std::uniform_int_distribution<std::size_t>(0, inputs.size() - 1)(rng_)];
      break;
    }
    case ModeTag::awaiting: {
      a = controller_.head_read(state_);
      const std::size_t n = value_count(info(a.kind).value);
      a.value = static_cast<std::uint8_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_));
      break;
    }
    case ModeTag::emitting: a = controller_.head_output(state_); break;
    }
    state_ = controller_.step_unchecked(state_, a);
    return a;
  }

private:
  const Controller& controller_;
  ControllerState state_;
  std::mt19937_64 rng_;
};

} // namespace marijke
