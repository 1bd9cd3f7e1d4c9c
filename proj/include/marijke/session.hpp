#pragma once

// One live closed-loop simulation driven by wire-protocol messages.
//
// A session is a serialized event loop: client messages and ticks are
// processed under one lock, and every message the session produces is
// appended to its log (index "n") in order. See README for the message
// schema.

#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "marijke/closed_loop.hpp"

namespace marijke {

using json = nlohmann::json;

inline constexpr int protocol_version = 1;

/// Handshake refused (wrong protocol version or not a hello).
class ProtocolError : public Error {
public:
  using Error::Error;
};

struct SessionOptions {
  std::string config_name = "reduced";
  std::string monitors = "all";
  MutationSet mutations;
  FaultProfile profile;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> record_dir;
};

/// Applies the fields of a hello message to server defaults.
inline SessionOptions parse_hello(const json& m, SessionOptions defaults) {
  if (!m.is_object() || m.value("kind", "") != "hello")
    throw ProtocolError("expected a hello message");
  if (!m.contains("v") || m["v"] != protocol_version)
    throw ProtocolError("unsupported protocol version; this server speaks v" + std::to_string(protocol_version));
  try {
    if (m.contains("config"))
      defaults.config_name = m["config"].get<std::string>();
    if (m.contains("monitors"))
      defaults.monitors = m["monitors"].get<std::string>();
    if (m.contains("seed"))
      defaults.seed = m["seed"].get<std::uint64_t>();
    if (m.contains("profile")) {
      const json& p = m["profile"];
      defaults.profile.sensor_fail = p.value("sensor_fail", 0.0);
      defaults.profile.stuck_aspect = p.value("stuck_aspect", 0.0);
      defaults.profile.motor_stall = p.value("motor_stall", 0.0);
      defaults.profile.command_rate = p.value("command_rate", 0.0);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad hello field: ") + e.what());
  }
  config_by_name(defaults.config_name);
  select_requirements(defaults.monitors);
  defaults.profile.validate();
  return defaults;
}

// ---------------------------------------------------------------------------
// Snapshots

namespace session_detail {

template <class E>
std::string str(E e) {
  return std::string(name(e));
}

inline json device_json(const Device& d) { return {{"position", d.position}, {"motion", str(d.motion)}}; }

} // namespace session_detail

inline json config_json(const std::string& name, const PlantConfig& c) {
  json locks = json::array(), orients = json::array();
  for (LockId l : c.locks)
    locks.push_back(std::string(marijke::name(l)));
  for (Orientation o : c.orientations)
    orients.push_back(std::string(marijke::name(o)));
  return {{"name", name},
          {"locks", locks},
          {"orientations", orients},
          {"barrier", c.include_barrier},
          {"alphabet_size", Alphabet(c).size()}};
}

/// Controller parameters of the configured devices.
inline json controller_json(const ControllerParams& p, const PlantConfig& c) {
  using session_detail::str;
  json locks = json::array();
  for (LockId l : c.locks) {
    json sides = json::array();
    for (StreamSide s : c.stream_sides) {
      json gates = json::object(), paddles = json::object();
      for (Orientation o : c.orientations) {
        gates[str(o)] = str(p.gate(l, s, o));
        paddles[str(o)] = str(p.paddle(l, s, o));
      }
      sides.push_back({{"side", str(s)},
                       {"gates", gates},
                       {"paddles", paddles},
                       {"entering", str(p.entering(l, s))},
                       {"leaving", str(p.leaving(l, s))},
                       {"water_equal", p.water(l, s)}});
    }
    locks.push_back({{"lock", str(l)}, {"emergency", p.in_emergency(l)}, {"sides", sides}});
  }
  json out = {{"locks", locks}};
  if (c.include_barrier)
    out["barrier"] = {{"status", str(p.barrier_status)},
                      {"emergency", p.barrier_in_emergency},
                      {"lights",
                       {{"upstream", str(p.barrier_light_set[0])}, {"downstream", str(p.barrier_light_set[1])}}}};
  return out;
}

inline json plant_json(const Plant& p) {
  using session_detail::device_json;
  using session_detail::str;
  const PlantConfig& c = p.config();
  json locks = json::array();
  for (LockId l : c.locks) {
    json sides = json::array();
    for (StreamSide s : c.stream_sides) {
      json gates = json::object(), paddles = json::object(), entering = json::object(), leaving = json::object();
      for (Orientation o : c.orientations) {
        gates[str(o)] = device_json(p.gate(l, s, o));
        paddles[str(o)] = device_json(p.paddle(l, s, o));
        entering[str(o)] = str(p.entering(l, s, o));
        leaving[str(o)] = str(p.leaving(l, s, o));
      }
      sides.push_back({{"side", str(s)},
                       {"gates", gates},
                       {"paddles", paddles},
                       {"entering", entering},
                       {"leaving", leaving},
                       {"differential", p.differential(l, s)}});
    }
    locks.push_back({{"lock", str(l)}, {"chamber", p.chamber(l)}, {"sides", sides}});
  }
  json faults = json::array();
  for (const auto& [t, f] : p.faults())
    faults.push_back({{"target", to_string(t)}, {"fault", to_string(f, t.kind)}});
  json out = {{"tick", p.tick_count()}, {"locks", locks}, {"faults", faults}};
  if (c.include_barrier) {
    json lights = json::object();
    for (StreamSide s : c.stream_sides)
      for (Orientation o : {Orientation::east, Orientation::west})
        lights[str(s)][str(o)] = str(p.barrier_light(s, o));
    out["barrier"] = device_json(p.barrier());
    out["barrier"]["lights"] = lights;
  }
  return out;
}

// ---------------------------------------------------------------------------

class Session {
public:
  Session(std::string id, SessionOptions opt)
      : id_(std::move(id)), opt_(std::move(opt)), config_(config_by_name(opt_.config_name)),
        loop_(config_, opt_.mutations, select_requirements(opt_.monitors), opt_.profile, opt_.seed),
        last_state_(loop_.state()), last_plant_(loop_.plant()) {
    loop_.set_record_trace(false);
    loop_.set_observer([this](std::uint64_t seq, const Action& a) { on_action(seq, a); });
    loop_.set_violation_observer([this](const Violation& v) { on_violation(v); });
    if (opt_.record_dir)
      open_recording();
  }

  ~Session() { close(); }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }
  const PlantConfig& config() const noexcept { return config_; }

  /// The handshake reply.
  json hello_ack(const json& correlation = nullptr) const {
    json ids = json::array();
    for (const Requirement& r : catalog())
      ids.push_back(r.id);
    json monitors = json::array();
    for (const Requirement* r : select_requirements(opt_.monitors))
      monitors.push_back(r->id);
    return {{"kind", "ack"},          {"v", protocol_version},
            {"id", correlation},      {"session", id_},
            {"config", config_json(opt_.config_name, config_)},
            {"requirements", ids},    {"monitors", monitors}};
  }

  /// Processes one client message; returns the messages it produced.
  std::vector<json> handle(const json& m) {
    std::unique_lock lock(mu_);
    const std::size_t mark = log_.size();
    process(m);
    return {log_.begin() + static_cast<std::ptrdiff_t>(mark), log_.end()};
  }

  std::vector<json> handle_text(std::string_view text) {
    json m;
    try {
      m = json::parse(text);
    } catch (const json::exception& e) {
      std::unique_lock lock(mu_);
      const std::size_t mark = log_.size();
      error(nullptr, std::string("malformed message: ") + e.what());
      return {log_.begin() + static_cast<std::ptrdiff_t>(mark), log_.end()};
    }
    return handle(m);
  }

  /// Log entries from index `from`, waiting up to `timeout` for new ones.
  std::vector<json> messages(std::size_t from, std::chrono::milliseconds timeout = {}) {
    std::unique_lock lock(mu_);
    if (timeout.count() > 0)
      cv_.wait_for(lock, timeout, [&] { return log_.size() > from || closed_; });
    if (from >= log_.size())
      return {};
    return {log_.begin() + static_cast<std::ptrdiff_t>(from), log_.end()};
  }

  std::size_t log_size() const {
    std::unique_lock lock(mu_);
    return log_.size();
  }

  bool closed() const {
    std::unique_lock lock(mu_);
    return closed_;
  }

  void close() {
    {
      std::unique_lock lock(mu_);
      closed_ = true;
      rate_hz_ = 0;
    }
    cv_.notify_all();
    ticker_cv_.notify_all();
    if (ticker_.joinable())
      ticker_.join();
  }

  /// Snapshot of the current state (not logged).
  json snapshot() const {
    std::unique_lock lock(mu_);
    return make_snapshot();
  }

  std::optional<std::filesystem::path> trace_path() const {
    if (!opt_.record_dir)
      return std::nullopt;
    return *opt_.record_dir / (id_ + ".trace");
  }
  std::optional<std::filesystem::path> scenario_path() const {
    if (!opt_.record_dir)
      return std::nullopt;
    return *opt_.record_dir / (id_ + ".scenario");
  }

private:
  void process(const json& m) {
    const json corr = m.is_object() && m.contains("id") ? m["id"] : json(nullptr);
    if (closed_)
      return error(corr, "session closed");
    if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string())
      return error(corr, "message needs a string 'kind'");
    const std::string kind = m["kind"];
    try {
      if (kind == "command")
        command(m, corr);
      else if (kind == "fault")
        fault(m, corr);
      else if (kind == "tick_control")
        tick_control(m, corr);
      else if (kind == "state_snapshot") {
        emit({{"kind", "ack"}, {"id", corr}});
        emit(make_snapshot());
      } else if (kind == "hello")
        error(corr, "session already established");
      else
        error(corr, "unknown message kind '" + kind + "'");
    } catch (const json::exception& e) {
      error(corr, std::string("bad field: ") + e.what());
    } catch (const Error& e) {
      error(corr, e.what());
    }
  }

  void command(const json& m, const json& corr) {
    const Action a = parse_action(m.at("action").get<std::string>());
    if (!a.is_stable_input() || !loop_.controller().alphabet().contains(a))
      throw InvalidAction("not an input of this configuration: " + to_string(a));
    emit({{"kind", "ack"}, {"id", corr}});
    record_event({loop_.plant().tick_count(), ScenarioEvent::Kind::input, a, {}, {}});
    loop_.input(a);
    snapshot_if_changed();
  }

  void fault(const json& m, const json& corr) {
    ScenarioEvent e;
    e.tick = loop_.plant().tick_count();
    e.target = parse_fault_target(m.at("target").get<std::string>());
    if (m.value("on", true)) {
      e.kind = ScenarioEvent::Kind::inject;
      e.fault = parse_fault(m.at("fault").get<std::string>(), e.target.kind);
    } else {
      e.kind = ScenarioEvent::Kind::clear;
    }
    loop_.apply(e);
    emit({{"kind", "ack"}, {"id", corr}});
    record_event(e);
    snapshot_if_changed();
  }

  void tick_control(const json& m, const json& corr) {
    const std::string mode = m.at("mode").get<std::string>();
    if (mode == "manual") {
      const auto n = m.value("ticks", std::uint64_t{1});
      if (n > 1'000'000)
        throw InvalidAction("at most 1000000 ticks per message");
      emit({{"kind", "ack"}, {"id", corr}});
      for (std::uint64_t i = 0; i < n; ++i)
        tick_once();
    } else if (mode == "auto") {
      const double rate = m.at("rate_hz").get<double>();
      if (!(rate > 0 && rate <= 1000))
        throw InvalidAction("rate_hz must lie in (0, 1000]");
      rate_hz_ = rate;
      emit({{"kind", "ack"}, {"id", corr}});
      if (!ticker_.joinable())
        ticker_ = std::thread([this] { run_ticker(); });
      ticker_cv_.notify_all();
    } else if (mode == "pause") {
      rate_hz_ = 0;
      emit({{"kind", "ack"}, {"id", corr}});
      ticker_cv_.notify_all();
    } else {
      throw InvalidAction("tick_control mode must be manual, auto or pause");
    }
  }

  void run_ticker() {
    std::unique_lock lock(mu_);
    while (!closed_) {
      if (rate_hz_ <= 0) {
        ticker_cv_.wait(lock, [&] { return closed_ || rate_hz_ > 0; });
        continue;
      }
      const auto period = std::chrono::duration<double>(1.0 / rate_hz_);
      if (ticker_cv_.wait_for(lock, period, [&] { return closed_; }))
        break;
      if (rate_hz_ > 0)
        tick_once();
    }
  }

  void tick_once() {
    // Random commands issued inside tick() are recorded as scenario events
    // only through the seed; the header carries it.
    loop_.tick();
    snapshot_if_changed();
  }

  // -- outbound messages ----------------------------------------------------

  void emit(json m) {
    m["n"] = log_.size();
    log_.push_back(std::move(m));
    cv_.notify_all();
  }

  void error(const json& corr, const std::string& message) {
    emit({{"kind", "error"}, {"id", corr}, {"message", message}});
  }

  void on_action(std::uint64_t seq, const Action& a) {
    emit({{"kind", "trace_event"}, {"seq", seq}, {"role", std::string(trace_kind(a))}, {"action", to_string(a)}});
    if (trace_out_) {
      trace_out_ << format_trace_line(seq, a) << '\n';
      trace_out_.flush();
      check_recording();
    }
  }

  void on_violation(const Violation& v) {
    emit({{"kind", "violation"},
          {"req", v.id},
          {"title", requirement(v.id).title},
          {"witness", v.witness},
          {"binding", v.binding}});
  }

  json make_snapshot() const {
    const ControllerState& st = loop_.state();
    static constexpr std::array<const char*, 3> modes{"stable", "awaiting", "emitting"};
    return {{"kind", "state_snapshot"},
            {"tick", loop_.plant().tick_count()},
            {"next_seq", loop_.steps()},
            {"mode", modes[to_u8(st.tag())]},
            {"controller", controller_json(st.params, config_)},
            {"plant", plant_json(loop_.plant())}};
  }

  void snapshot_if_changed() {
    if (loop_.state() == last_state_ && loop_.plant() == last_plant_)
      return;
    last_state_ = loop_.state();
    last_plant_ = loop_.plant();
    emit(make_snapshot());
  }

  // -- recording ------------------------------------------------------------

  void open_recording() {
    std::error_code ec;
    std::filesystem::create_directories(*opt_.record_dir, ec);
    trace_out_.open(*trace_path(), std::ios::trunc);
    scenario_out_.open(*scenario_path(), std::ios::trunc);
    if (trace_out_ && scenario_out_) {
      write_scenario_header(scenario_out_, {opt_.config_name, opt_.seed, opt_.profile});
      scenario_out_.flush();
    }
    check_recording();
  }

  void record_event(const ScenarioEvent& e) {
    if (!scenario_out_)
      return;
    scenario_out_ << to_string(e) << '\n';
    scenario_out_.flush();
    check_recording();
  }

  void check_recording() {
    if (!opt_.record_dir || recording_failed_ || (trace_out_.good() && scenario_out_.good()))
      return;
    recording_failed_ = true;
    trace_out_.close();
    scenario_out_.close();
    trace_out_.setstate(std::ios::badbit);
    scenario_out_.setstate(std::ios::badbit);
    error(nullptr, "recording failed under " + opt_.record_dir->string() + "; session continues unrecorded");
  }

  std::string id_;
  SessionOptions opt_;
  PlantConfig config_;
  ClosedLoop loop_;
  ControllerState last_state_;
  Plant last_plant_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable ticker_cv_;
  std::vector<json> log_;
  bool closed_ = false;
  double rate_hz_ = 0;
  std::thread ticker_;

  std::ofstream trace_out_;
  std::ofstream scenario_out_;
  bool recording_failed_ = false;
};

} // namespace marijke
