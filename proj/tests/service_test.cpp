#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "marijke/service.hpp"

using namespace marijke;
namespace fs = std::filesystem;

namespace {

json command(int id, const std::string& action) { return {{"kind", "command"}, {"id", id}, {"action", action}}; }

json ticks(int id, int n) { return {{"kind", "tick_control"}, {"id", id}, {"mode", "manual"}, {"ticks", n}}; }

std::vector<json> of_kind(const std::vector<json>& ms, const std::string& kind) {
  std::vector<json> out;
  for (const json& m : ms)
    if (m["kind"] == kind)
      out.push_back(m);
  return out;
}

std::vector<json> parse_ndjson(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty())
      out.push_back(json::parse(line));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("marijke_service_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

SessionOptions full() {
  SessionOptions o;
  o.config_name = "full";
  return o;
}

} // namespace

// ---------------------------------------------------------------------------

TEST(Hello, AckCarriesConfigAndCatalog) {
  const json hello = {{"kind", "hello"}, {"v", 1}, {"id", "h"}, {"config", "reduced"}};
  Session s("s1", parse_hello(hello, {}));
  const json ack = s.hello_ack("h");
  EXPECT_EQ(ack["kind"], "ack");
  EXPECT_EQ(ack["id"], "h");
  EXPECT_EQ(ack["v"], 1);
  EXPECT_EQ(ack["session"], "s1");
  EXPECT_EQ(ack["config"]["name"], "reduced");
  EXPECT_EQ(ack["config"]["locks"], json::array({"north"}));
  EXPECT_EQ(ack["requirements"].size(), catalog().size());
  EXPECT_EQ(ack["requirements"][0], "safreq1");
  EXPECT_EQ(ack["monitors"].size(), catalog().size());
}

TEST(Hello, Validation) {
  EXPECT_THROW(parse_hello({{"kind", "hello"}, {"v", 2}}, {}), ProtocolError);
  EXPECT_THROW(parse_hello({{"kind", "hello"}}, {}), ProtocolError);
  EXPECT_THROW(parse_hello({{"kind", "command"}, {"v", 1}}, {}), ProtocolError);
  EXPECT_THROW(parse_hello({{"kind", "hello"}, {"v", 1}, {"config", "nowhere"}}, {}), ConfigError);
  EXPECT_THROW(parse_hello({{"kind", "hello"}, {"v", 1}, {"monitors", "safreq99"}}, {}), Error);
  EXPECT_THROW(parse_hello({{"kind", "hello"}, {"v", 1}, {"profile", {{"motor_stall", 2.0}}}}, {}), ConfigError);
  EXPECT_THROW(parse_hello({{"kind", "hello"}, {"v", 1}, {"seed", "x"}}, {}), ParseError);

  const SessionOptions o = parse_hello(
      {{"kind", "hello"}, {"v", 1}, {"seed", 9}, {"monitors", "all-safety"}, {"profile", {{"command_rate", 0.5}}}}, {});
  EXPECT_EQ(o.seed, 9u);
  EXPECT_EQ(o.monitors, "all-safety");
  EXPECT_EQ(o.profile.command_rate, 0.5);
}

// ---------------------------------------------------------------------------

TEST(SessionCommand, EmergencyOnFullConfiguration) {
  Session s("s1", full());
  const auto out = s.handle(command(7, "EmergencyLockCommand(north,activate)"));
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out.front(), (json{{"kind", "ack"}, {"id", 7}, {"n", 0}}));

  const auto events = of_kind(out, "trace_event");
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events[0]["role"], "input");
  std::size_t outputs = 0;
  for (const json& e : events)
    outputs += e["role"] == "output";
  EXPECT_GE(outputs, 16u);

  const auto snaps = of_kind(out, "state_snapshot");
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_EQ(out.back(), snaps.back());
  const json& locks = snaps[0]["controller"]["locks"];
  ASSERT_EQ(locks.size(), 2u);
  EXPECT_EQ(locks[0]["lock"], "north");
  EXPECT_TRUE(locks[0]["emergency"].get<bool>());
  EXPECT_FALSE(locks[1]["emergency"].get<bool>());
  EXPECT_TRUE(of_kind(out, "violation").empty());
}

TEST(SessionCommand, StuckGreenBarrierLightDoesNotBlockClose) {
  Session s("s1", {});
  const auto f = s.handle({{"kind", "fault"},
                           {"id", 1},
                           {"target", "barrier_light(upstream,east)"},
                           {"fault", "stuck_aspect(green)"}});
  EXPECT_EQ(f.front()["kind"], "ack");
  const json snap = s.snapshot();
  EXPECT_EQ(snap["plant"]["barrier"]["lights"]["upstream"]["east"], "green");
  EXPECT_EQ(snap["controller"]["barrier"]["lights"]["upstream"], "red");

  const auto out = s.handle(command(2, "BarrierCommand(command_close)"));
  bool closed = false;
  for (const json& e : of_kind(out, "trace_event"))
    closed = closed || e["action"] == "BarrierActuator(do_close)";
  EXPECT_TRUE(closed);
}

TEST(SessionCommand, RejectedMessagesKeepTheSession) {
  Session s("s1", {});
  for (const std::string bad : {"{not json", "[1,2]", R"x({"id":3})x", R"x({"kind":"launch","id":4})x",
                                R"x({"kind":"command","id":5})x", R"x({"kind":"command","id":6,"action":"Nope(x)"})x",
                                R"x({"kind":"command","id":7,"action":"GateActuator(north,upstream,east,do_open)"})x",
                                R"x({"kind":"command","id":8,"action":"GateCommand(south,upstream,command_open)"})x",
                                R"x({"kind":"fault","id":9,"target":"gate(north,upstream,east)","fault":"stuck_aspect(red)"})x",
                                R"x({"kind":"tick_control","id":10,"mode":"sideways"})x",
                                R"x({"kind":"hello","v":1,"id":11})x"}) {
    const auto out = s.handle_text(bad);
    ASSERT_EQ(out.size(), 1u) << bad;
    EXPECT_EQ(out[0]["kind"], "error") << bad;
    EXPECT_FALSE(out[0]["message"].get<std::string>().empty());
  }
  EXPECT_EQ(s.handle_text(R"x({"kind":"command","id":6,"action":"Nope(x)"})x")[0]["id"], 6);
  EXPECT_EQ(s.snapshot()["next_seq"], 0);

  const auto ok = s.handle(command(12, "BarrierCommand(command_close)"));
  EXPECT_EQ(ok.front()["kind"], "ack");
  EXPECT_EQ(of_kind(ok, "trace_event").front()["seq"], 0);
}

TEST(SessionCommand, FaultToggle) {
  Session s("s1", {});
  const json on = {{"kind", "fault"}, {"id", 1}, {"target", "gate(north,upstream,east)"}, {"fault", "motor_stall"}};
  s.handle(on);
  EXPECT_EQ(s.snapshot()["plant"]["faults"],
            json::array({{{"target", "gate(north,upstream,east)"}, {"fault", "motor_stall"}}}));
  EXPECT_EQ(s.handle(on).front()["kind"], "ack");
  const auto conflict = s.handle({{"kind", "fault"}, {"id", 2}, {"target", "gate(north,upstream,east)"}, {"fault", "sensor_fail"}});
  EXPECT_EQ(conflict.front()["kind"], "error");
  s.handle({{"kind", "fault"}, {"id", 3}, {"target", "gate(north,upstream,east)"}, {"on", false}});
  EXPECT_TRUE(s.snapshot()["plant"]["faults"].empty());
}

TEST(SessionCommand, MutatedControllerStreamsViolation) {
  SessionOptions o;
  o.mutations = MutationSet{Mutation::drop_emergency_check_gate_close};
  Session s("s1", o);
  s.handle(command(1, "EmergencyLockCommand(north,activate)"));
  const auto out = s.handle(command(2, "GateCommand(north,upstream,command_close)"));
  const auto v = of_kind(out, "violation");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0]["req"], "safreq10");
  EXPECT_EQ(v[0]["title"], requirement("safreq10").title);
  EXPECT_EQ(v[0]["binding"], "l=north");
  // Emitted right after the offending action, which the witness names.
  const auto at = std::find(out.begin(), out.end(), v[0]);
  ASSERT_NE(at, out.begin());
  const json& before = *(at - 1);
  EXPECT_EQ(before["kind"], "trace_event");
  EXPECT_EQ(before["seq"], v[0]["witness"]);
  EXPECT_EQ(before["action"], "GateActuator(north,upstream,east,do_close)");
}

// ---------------------------------------------------------------------------
// Stream properties

namespace {

// Commands, faults and ticks in a fixed mix.
void drive(Session& s, int rounds) {
  const std::vector<std::string> cmds = {
      "BarrierCommand(command_close)",   "GateCommand(north,downstream,command_open)",
      "PaddleCommand(north,downstream,command_open)", "GateCommand(north,downstream,command_close)",
      "PaddleCommand(north,upstream,command_open)",    "GateCommand(north,upstream,command_open)",
      "EmergencyLockCommand(north,activate)",          "EmergencyLockCommand(north,deactivate)",
      "BarrierCommand(command_open)",                  "GateCommand(north,upstream,command_stop)"};
  int id = 0;
  for (int r = 0; r < rounds; ++r)
    for (const std::string& c : cmds) {
      s.handle(command(++id, c));
      ++id;
      s.handle(ticks(id, 1 + id % 7));
      if (id % 9 == 0)
        s.handle({{"kind", "fault"}, {"id", ++id}, {"target", "paddle(north,upstream,east)"}, {"fault", "sensor_fail"}});
      if (id % 13 == 0)
        s.handle({{"kind", "fault"}, {"id", ++id}, {"target", "paddle(north,upstream,east)"}, {"on", false}});
    }
}

} // namespace

TEST(Stream, SequenceNumbersHaveNoGaps) {
  SessionOptions o;
  o.profile.command_rate = 0.2;
  o.seed = 3;
  Session s("s1", o);
  drive(s, 4);
  const auto log = s.messages(0);
  std::uint64_t next = 0;
  std::size_t n = 0;
  for (const json& m : log) {
    EXPECT_EQ(m["n"], n++);
    if (m["kind"] == "trace_event") {
      EXPECT_EQ(m["seq"], next++);
    }
  }
  EXPECT_GT(next, 100u);
  EXPECT_EQ(s.snapshot()["next_seq"], next);
}

TEST(Stream, SnapshotsEqualTheFoldOfTheTrace) {
  for (const char* cfg : {"reduced", "full"}) {
    SessionOptions o;
    o.config_name = cfg;
    o.profile.command_rate = 0.3;
    o.seed = 11;
    Session s("s1", o);
    drive(s, 3);
    const PlantConfig config = config_by_name(cfg);
    const Controller c(config);
    ControllerState st = c.initial_state();
    std::size_t snaps = 0;
    for (const json& m : s.messages(0)) {
      if (m["kind"] == "trace_event")
        st = c.step(st, parse_action(m["action"].get<std::string>()));
      else if (m["kind"] == "state_snapshot") {
        ++snaps;
        ASSERT_EQ(m["controller"], controller_json(st.params, config)) << cfg << " at n=" << m["n"];
        ASSERT_EQ(m["mode"], "stable");
      }
    }
    EXPECT_GT(snaps, 10u);
  }
}

TEST(Stream, SnapshotOnlyOnChange) {
  Session s("s1", {});
  // Plant at rest: ticks between heartbeats change only the tick counter,
  // which counts as a change of the plant state.
  const auto first = s.handle(ticks(1, 1));
  EXPECT_EQ(of_kind(first, "state_snapshot").size(), 1u);
  const auto again = s.handle({{"kind", "state_snapshot"}, {"id", 2}});
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0]["kind"], "ack");
  EXPECT_EQ(again[1]["kind"], "state_snapshot");
  // A refused command leaves the state alone.
  const auto cmd = s.handle(command(3, "EmergencyLockCommand(north,deactivate)"));
  EXPECT_EQ(of_kind(cmd, "state_snapshot").size(), 0u);
}

TEST(Stream, AutoTicking) {
  Session s("s1", {});
  EXPECT_EQ(s.handle({{"kind", "tick_control"}, {"id", 1}, {"mode", "auto"}, {"rate_hz", 0}}).front()["kind"],
            "error");
  EXPECT_EQ(s.handle({{"kind", "tick_control"}, {"id", 2}, {"mode", "auto"}, {"rate_hz", 500}}).front()["kind"],
            "ack");
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (s.snapshot()["tick"].get<int>() < 30 && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  EXPECT_GE(s.snapshot()["tick"].get<int>(), 30);
  s.handle({{"kind", "tick_control"}, {"id", 3}, {"mode", "pause"}});
  const int paused = s.snapshot()["tick"];
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_EQ(s.snapshot()["tick"], paused);
  // Heartbeats arrive as sensor events.
  bool heartbeat = false;
  for (const json& m : s.messages(0))
    heartbeat = heartbeat || (m["kind"] == "trace_event" && m["role"] == "input");
  EXPECT_TRUE(heartbeat);
}

TEST(Stream, WaitForMessages) {
  Session s("s1", {});
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    s.handle(ticks(1, 1));
  });
  const auto got = s.messages(0, std::chrono::seconds(5));
  t.join();
  ASSERT_FALSE(got.empty());
  EXPECT_EQ(got[0]["kind"], "ack");
}

// ---------------------------------------------------------------------------
// Recording

namespace {

// Replays a recorded scenario and returns the trace file contents.
std::string replay(const fs::path& scenario_file, std::uint64_t final_tick) {
  std::ifstream in(scenario_file);
  const Scenario sc = read_scenario_file(in);
  ClosedLoop loop(config_by_name(sc.header.config.value()), {}, {}, sc.header.profile.value_or(FaultProfile{}),
                  sc.header.seed.value_or(0));
  loop.run(sc.events, final_tick);
  for (const ScenarioEvent& e : sc.events)
    if (e.tick >= final_tick)
      loop.apply(e);
  std::ostringstream out;
  write_trace(out, loop.trace());
  return out.str();
}

} // namespace

TEST(Recording, ReplayIsByteIdentical) {
  const fs::path dir = fresh_dir("replay");
  SessionOptions o;
  o.record_dir = dir;
  o.seed = 5;
  o.profile = {0.01, 0.01, 0.01, 0.1};
  std::uint64_t final_tick = 0;
  {
    Session s("s1", o);
    EXPECT_TRUE(fs::exists(dir / "s1.trace"));
    drive(s, 3);
    s.handle(command(999, "BarrierCommand(command_close)"));
    final_tick = s.snapshot()["tick"];
    EXPECT_TRUE(of_kind(s.messages(0), "error").empty());
  }
  const std::string recorded = slurp(dir / "s1.trace");
  EXPECT_GT(recorded.size(), 1000u);
  EXPECT_EQ(replay(dir / "s1.scenario", final_tick), recorded);
  EXPECT_NO_THROW({
    std::ifstream in(dir / "s1.trace");
    read_trace(in);
  });
  fs::remove_all(dir);
}

TEST(Recording, FlushedPerEvent) {
  const fs::path dir = fresh_dir("flush");
  SessionOptions o;
  o.record_dir = dir;
  Session s("s1", o);
  EXPECT_EQ(slurp(dir / "s1.trace"), "");
  s.handle(command(1, "BarrierCommand(command_close)"));
  EXPECT_EQ(slurp(dir / "s1.trace").substr(0, 31), "0 input BarrierCommand(command_");
  EXPECT_NE(slurp(dir / "s1.scenario").find("0 BarrierCommand(command_close)\n"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Recording, ConcurrentSessionsWriteDisjointFiles) {
  const fs::path dir = fresh_dir("concurrent");
  Service svc([&] {
    SessionOptions o;
    o.record_dir = dir;
    return o;
  }());
  const int port = svc.start();
  constexpr int clients = 4;
  std::vector<std::string> ids(clients);
  std::vector<std::thread> threads;
  for (int i = 0; i < clients; ++i)
    threads.emplace_back([&, i] {
      httplib::Client cli("127.0.0.1", port);
      auto r = cli.Post("/session", json{{"kind", "hello"}, {"v", 1}, {"seed", i}}.dump(), "application/json");
      ASSERT_TRUE(r);
      ids[i] = json::parse(r->body)["session"];
      for (int k = 0; k < 20; ++k) {
        cli.Post("/session/" + ids[i] + "/send", command(k, k % 2 ? "BarrierCommand(command_open)" : "BarrierCommand(command_close)").dump(),
                 "application/json");
        cli.Post("/session/" + ids[i] + "/send", ticks(100 + k, 12).dump(), "application/json");
      }
    });
  for (auto& t : threads)
    t.join();
  std::set<std::string> distinct(ids.begin(), ids.end());
  EXPECT_EQ(distinct.size(), static_cast<std::size_t>(clients));
  for (const std::string& id : ids) {
    auto s = svc.session(id);
    ASSERT_TRUE(s);
    // Each file holds exactly its own session's stream.
    std::string expected;
    for (const json& m : s->messages(0))
      if (m["kind"] == "trace_event")
        expected += m["seq"].dump() + " " + m["role"].get<std::string>() + " " + m["action"].get<std::string>() + "\n";
    EXPECT_EQ(slurp(dir / (id + ".trace")), expected) << id;
  }
  svc.stop();
  fs::remove_all(dir);
}

TEST(Recording, StorageFailureIsReportedAndSessionContinues) {
  const fs::path dir = fresh_dir("failure");
  const fs::path blocker = dir / "file";
  std::ofstream(blocker) << "x";
  SessionOptions o;
  o.record_dir = blocker / "sub";
  Session s("s1", o);
  const auto log = s.messages(0);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0]["kind"], "error");
  EXPECT_NE(log[0]["message"].get<std::string>().find("recording failed"), std::string::npos);
  const auto out = s.handle(command(1, "BarrierCommand(command_close)"));
  EXPECT_EQ(out.front()["kind"], "ack");
  EXPECT_FALSE(of_kind(out, "trace_event").empty());
  EXPECT_TRUE(of_kind(out, "error").empty());
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// HTTP

class Http : public ::testing::Test {
protected:
  void SetUp() override {
    port_ = svc_.start();
    cli_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { svc_.stop(); }

  std::string open(const json& hello = {{"kind", "hello"}, {"v", 1}}) {
    auto r = cli_->Post("/session", hello.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    return json::parse(r->body)["session"];
  }

  std::vector<json> send(const std::string& id, const json& m) {
    auto r = cli_->Post("/session/" + id + "/send", m.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    return parse_ndjson(r->body);
  }

  Service svc_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> cli_;
};

TEST_F(Http, Catalog) {
  auto r = cli_->Get("/catalog");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const json c = json::parse(r->body);
  ASSERT_EQ(c.size(), catalog().size());
  EXPECT_EQ(c[0]["id"], "safreq1");
  EXPECT_EQ(c[0]["category"], "safety");
  EXPECT_EQ(c[0]["title"], requirement("safreq1").title);
}

TEST_F(Http, HandshakeRefusals) {
  auto r = cli_->Post("/session", R"x({"kind":"hello","v":2,"id":"x"})x", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 426);
  const json e = json::parse(r->body);
  EXPECT_EQ(e["kind"], "error");
  EXPECT_EQ(e["id"], "x");
  EXPECT_EQ(e["v"], 1);

  r = cli_->Post("/session", "{", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  r = cli_->Post("/session", R"x({"kind":"hello","v":1,"config":"nowhere"})x", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body)["kind"], "error");
}

TEST_F(Http, SendAndEvents) {
  const std::string id = open({{"kind", "hello"}, {"v", 1}, {"config", "full"}});
  const auto out = send(id, command(1, "EmergencyLockCommand(north,activate)"));
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0]["kind"], "ack");
  const auto bad = cli_->Post("/session/" + id + "/send", "{oops", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(parse_ndjson(bad->body)[0]["kind"], "error");

  auto r = cli_->Get("/session/" + id + "/events?from=0&follow=0");
  ASSERT_TRUE(r);
  const auto log = parse_ndjson(r->body);
  ASSERT_EQ(log.size(), out.size() + 1);
  EXPECT_TRUE(std::equal(out.begin(), out.end(), log.begin()));

  r = cli_->Get("/session/" + id + "/events?from=3&follow=0");
  ASSERT_TRUE(r);
  EXPECT_EQ(parse_ndjson(r->body)[0]["n"], 3);
  EXPECT_EQ(cli_->Get("/session/" + id + "/events?from=x")->status, 400);
}

TEST_F(Http, FollowStreamsNewMessages) {
  const std::string id = open();
  std::vector<json> seen;
  std::string buffer;
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", port_);
    c.Get("/session/" + id + "/events?from=0&follow=1", [&](const char* data, std::size_t len) {
      buffer.append(data, len);
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        seen.push_back(json::parse(buffer.substr(0, nl)));
        buffer.erase(0, nl + 1);
      }
      return !(seen.size() >= 3 && seen.back()["kind"] == "state_snapshot");
    });
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  send(id, command(1, "BarrierCommand(command_close)"));
  reader.join();
  ASSERT_GE(seen.size(), 3u);
  EXPECT_EQ(seen[0]["kind"], "ack");
  for (std::size_t i = 0; i < seen.size(); ++i)
    EXPECT_EQ(seen[i]["n"], i);
}

TEST_F(Http, UnknownAndDeletedSessions) {
  EXPECT_EQ(cli_->Post("/session/zz/send", "{}", "application/json")->status, 404);
  EXPECT_EQ(cli_->Get("/session/zz/events")->status, 404);
  const std::string id = open();
  auto s = svc_.session(id);
  EXPECT_EQ(cli_->Delete("/session/" + id)->status, 204);
  EXPECT_TRUE(s->closed());
  EXPECT_EQ(cli_->Delete("/session/" + id)->status, 404);
  EXPECT_EQ(cli_->Post("/session/" + id + "/send", "{}", "application/json")->status, 404);
}
