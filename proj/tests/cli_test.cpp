#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "marijke/cli.hpp"

using namespace marijke;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    out.push_back(l);
  return out;
}

std::size_t count_verdicts(const std::string& text, const std::string& verdict) {
  std::size_t n = 0;
  for (const std::string& l : lines(text)) {
    std::istringstream in(l);
    std::string id, v;
    in >> id >> v;
    n += v == verdict;
  }
  return n;
}

class Files : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("marijke_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

} // namespace

// ---------------------------------------------------------------------------

TEST(Usage, Errors) {
  Result r = cli({});
  EXPECT_EQ(r.code, exit_usage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);

  r = cli({"explore", "--bogus"});
  EXPECT_EQ(r.code, exit_usage);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  EXPECT_NE(r.err.find("Usage: marijke explore"), std::string::npos);

  EXPECT_EQ(cli({"frobnicate"}).code, exit_usage);
  EXPECT_EQ(cli({"monitor"}).code, exit_usage);
  EXPECT_EQ(cli({"explore", "--mode", "sideways"}).code, exit_usage);
  EXPECT_EQ(cli({"explore", "--mode", "bounded"}).code, exit_usage);
  EXPECT_EQ(cli({"check", "--req", "safreq99"}).code, exit_usage);
  EXPECT_EQ(cli({"check", "--mutation", "nothing"}).code, exit_usage);
  EXPECT_EQ(cli({"serve", "--port", "0"}).code, exit_usage);
}

TEST(Usage, Help) {
  const Result r = cli({"--help"});
  EXPECT_EQ(r.code, exit_ok);
  for (const char* sub : {"explore", "check", "monitor", "simulate", "serve", "trace"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
}

// ---------------------------------------------------------------------------

TEST(Explore, StatsAndDeterminism) {
  const Result a = cli({"explore", "--mode", "bounded", "--depth", "12"});
  EXPECT_EQ(a.code, exit_ok);
  ASSERT_EQ(lines(a.out).size(), 1u);
  EXPECT_TRUE(a.out.starts_with("stats states="));
  EXPECT_NE(a.out.find("depth=12 exhaustive=no"), std::string::npos);
  EXPECT_NE(a.err.find("time explore="), std::string::npos);

  EXPECT_EQ(cli({"explore", "--mode", "bounded", "--depth", "12"}).out, a.out);
  EXPECT_EQ(cli({"explore", "--mode", "bounded", "--depth", "12", "--threads", "4"}).out, a.out);

  // Cross-check against the library.
  ExploreOptions opt;
  opt.mode = ExploreMode::bounded;
  opt.depth = 12;
  const GraphStats s = explore(Controller(PlantConfig::reduced()), opt).stats();
  EXPECT_NE(a.out.find("states=" + std::to_string(s.states) + " "), std::string::npos);
  EXPECT_NE(a.out.find("edges=" + std::to_string(s.edges) + " "), std::string::npos);

  const Result w = cli({"explore", "--mode", "random", "--steps", "5000", "--seed", "4"});
  EXPECT_EQ(w.code, exit_ok);
  EXPECT_EQ(cli({"explore", "--mode", "random", "--steps", "5000", "--seed", "4"}).out, w.out);
}

TEST(Explore, CeilingExceeded) {
  const Result r = cli({"explore", "--config", "full"});
  EXPECT_EQ(r.code, exit_ceiling);
  EXPECT_NE(r.err.find("exceeds ceiling"), std::string::npos);
  EXPECT_EQ(cli({"check", "--ceiling", "1000"}).code, exit_ceiling);
  // Bounded exploration is not subject to the ceiling.
  EXPECT_EQ(cli({"explore", "--config", "full", "--mode", "bounded", "--depth", "3"}).code, exit_ok);
}

TEST_F(Files, ConfigFiles) {
  EXPECT_EQ(cli({"explore", "--config", file("c.json", R"({"preset":"reduced","ceiling":1000})")}).code, exit_ceiling);

  const std::string two = file("two.json", R"({"locks":["north","south"],"orientations":["east"],"barrier":false})");
  const Result r = cli({"explore", "--config", two, "--mode", "bounded", "--depth", "2"});
  EXPECT_EQ(r.code, exit_ok);
  // Inputs at depth 1: a file config with two locks has more of them than the reduced preset.
  const Result reduced = cli({"explore", "--mode", "bounded", "--depth", "2"});
  EXPECT_NE(r.out, reduced.out);

  EXPECT_EQ(cli({"explore", "--config", file("k.json", R"({"preset":"reduced","colour":"blue"})")}).code,
            exit_invalid_config);
  EXPECT_EQ(cli({"explore", "--config", file("b.json", "{")}).code, exit_invalid_config);
  EXPECT_EQ(cli({"explore", "--config", file("l.json", R"({"locks":["east"]})")}).code, exit_invalid_config);
  EXPECT_EQ(cli({"explore", "--config", file("o.json", R"({"locks":[]})")}).code, exit_invalid_config);
  EXPECT_EQ(cli({"explore", "--config", file("p.json", R"({"profile":{"motor_stall":3}})")}).code,
            exit_invalid_config);
  EXPECT_EQ(cli({"explore", "--config", "nowhere"}).code, exit_invalid_config);
  EXPECT_EQ(cli({"explore", "--config", path("absent.json")}).code, exit_missing_file);
}

// ---------------------------------------------------------------------------

TEST(Check, ReducedAllSafety) {
  const Result r = cli({"check", "--config", "reduced1", "--req", "all-safety"});
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_EQ(count_verdicts(r.out, "ok"), 21u);
  EXPECT_EQ(count_verdicts(r.out, "violated"), 0u);
  EXPECT_EQ(lines(r.out)[0], "stats states=5316928 stable=253440 edges=21916480 depth=47 exhaustive=yes");
}

TEST(Check, BoundedGraphLeavesLivenessOpen) {
  const Result r = cli({"check", "--depth", "8", "--req", "all-liveness,safreq1"});
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_EQ(count_verdicts(r.out, "n/a"), 6u);
  EXPECT_EQ(count_verdicts(r.out, "ok"), 1u);
}

TEST_F(Files, MutationCounterexampleRoundTrip) {
  const std::string cex_dir = path("cex");
  const Result r = cli({"check", "--mutation", "drop_water_equal_guard", "--req", "safreq5,safreq1", "--cex-dir", cex_dir});
  EXPECT_EQ(r.code, exit_violation);
  const auto out = lines(r.out);
  // Catalog order, whatever the order of --req.
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[1], "safreq1 ok - -");
  EXPECT_TRUE(out[2].starts_with("safreq5 violated "));
  const std::string cex = (fs::path(cex_dir) / "safreq5.trace").string();
  EXPECT_EQ(out[3], "counterexample safreq5 " + cex);
  ASSERT_TRUE(fs::exists(cex));
  EXPECT_FALSE(fs::exists(fs::path(cex_dir) / "safreq1.trace"));

  // The monitors find the same violation at the same index.
  const Result m = cli({"monitor", "--trace", cex, "--req", "safreq5"});
  EXPECT_EQ(m.code, exit_violation);
  EXPECT_EQ(lines(m.out)[0].substr(0, lines(m.out)[0].rfind(' ')), out[2].substr(0, out[2].rfind(' ')));

  // A run of the mutant only.
  EXPECT_EQ(cli({"trace", cex, "--replay", "--quiet"}).code, exit_violation);
  // Pretty printing.
  const Result t = cli({"trace", cex});
  EXPECT_EQ(t.code, exit_ok);
  std::ifstream in(cex);
  const auto actions = read_trace(in);
  const auto printed = lines(t.out);
  ASSERT_EQ(printed.size(), actions.size() + 1);
  EXPECT_EQ(printed[0], "       0  input   " + to_string(actions[0]));
  EXPECT_EQ(printed.back(), cex + ": " + std::to_string(actions.size()) + " actions, valid");
}

// ---------------------------------------------------------------------------

TEST_F(Files, MonitorEmptyTrace) {
  const Result r = cli({"monitor", "--trace", file("empty.trace", "")});
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_EQ(lines(r.out).size(), catalog().size());
  EXPECT_EQ(count_verdicts(r.out, "violated"), 0u);
  EXPECT_EQ(lines(r.out)[0], "safreq1 ok - -");
}

TEST_F(Files, MonitorErrors) {
  EXPECT_EQ(cli({"monitor", "--trace", path("missing.trace")}).code, exit_missing_file);
  const Result bad = cli({"monitor", "--trace", file("bad.trace", "0 input BarrierCommand(command_close)\n1 input Frob(x)\n")});
  EXPECT_EQ(bad.code, exit_malformed_trace);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos);
  // Outside the reduced configuration.
  EXPECT_EQ(cli({"monitor", "--trace", file("south.trace", "0 input GateCommand(south,upstream,command_open)\n")}).code,
            exit_malformed_trace);
  EXPECT_EQ(cli({"monitor", "--config", "full", "--trace",
                 file("south2.trace", "0 input GateCommand(south,upstream,command_open)\n")})
                .code,
            exit_ok);
}

// ---------------------------------------------------------------------------

TEST(Simulate, PinnedRandomWalk) {
  const Result r = cli({"simulate", "--steps", "1000000", "--seed", "7", "--req", "all-safety,all-causality"});
  EXPECT_EQ(r.code, exit_ok);
  const auto out = lines(r.out);
  ASSERT_EQ(out.size(), 34u);
  EXPECT_EQ(out[0], "stats mode=random-walk config=full steps=1000000 seed=7 violations=0");
  EXPECT_EQ(count_verdicts(r.out, "ok"), 33u);
}

TEST(Simulate, DefaultsAndRepeatability) {
  const Result a = cli({"simulate", "--steps", "20000", "--seed", "2"});
  EXPECT_EQ(a.code, exit_ok);
  EXPECT_EQ(lines(a.out).size(), 34u);
  EXPECT_EQ(cli({"simulate", "--steps", "20000", "--seed", "2"}).out, a.out);
}

TEST(Simulate, MutantIsCaught) {
  const Result r = cli({"simulate", "--config", "reduced", "--steps", "200000", "--seed", "1", "--mutation",
                     "drop_water_equal_guard", "--req", "safreq5"});
  EXPECT_EQ(r.code, exit_violation);
  EXPECT_EQ(count_verdicts(r.out, "violated"), 1u);
}

TEST_F(Files, ClosedLoopScenario) {
  const std::string sc = file("run.scenario", "#! config reduced\n"
                                              "#! seed 3\n"
                                              "#! profile 0.01 0.01 0.01 0.05\n"
                                              "# close the barrier, then open the downstream side\n"
                                              "0 BarrierCommand(command_close)\n"
                                              "20 GateCommand(north,downstream,command_open)\n"
                                              "30 inject(gate(north,downstream,east),motor_stall)\n"
                                              "60 clear(gate(north,downstream,east))\n");
  const std::string t1 = path("a.trace"), t2 = path("b.trace");
  const Result a = cli({"simulate", "--scenario", sc, "--steps", "400", "--trace-out", t1});
  EXPECT_EQ(a.code, exit_ok) << a.err;
  EXPECT_TRUE(lines(a.out)[0].starts_with("stats mode=closed-loop config=reduced ticks=400 seed=3 actions="));
  EXPECT_EQ(cli({"simulate", "--scenario", sc, "--steps", "400", "--trace-out", t2}).out, a.out);
  const std::string trace = slurp(t1);
  EXPECT_GT(trace.size(), 0u);
  EXPECT_EQ(slurp(t2), trace);

  // Oracle: the library run with the same settings.
  std::ifstream in(sc);
  const Scenario parsed = read_scenario_file(in);
  ClosedLoop loop(PlantConfig::reduced(), {}, {}, *parsed.header.profile, 3);
  loop.run(parsed.events, 400);
  std::ostringstream expected;
  write_trace(expected, loop.trace());
  EXPECT_EQ(trace, expected.str());

  // The recorded trace is a controller run.
  EXPECT_EQ(cli({"trace", t1, "--replay", "--quiet"}).out, t1 + ": " + std::to_string(loop.trace().size()) +
                                                               " actions, valid\n");
  // Flags override the header.
  EXPECT_NE(cli({"simulate", "--scenario", sc, "--steps", "400", "--seed", "4"}).out, a.out);
  // Standard output.
  const Result s = cli({"simulate", "--scenario", sc, "--steps", "400", "--trace-out", "-"});
  EXPECT_TRUE(s.out.starts_with(trace));
}

TEST_F(Files, ScenarioErrors) {
  EXPECT_EQ(cli({"simulate", "--scenario", path("none.scenario"), "--steps", "5"}).code, exit_missing_file);
  EXPECT_EQ(cli({"simulate", "--scenario", file("bad.scenario", "x BarrierCommand(command_close)\n"), "--steps", "5"})
                .code,
            exit_malformed_trace);
  EXPECT_EQ(cli({"simulate", "--scenario", file("bad2.scenario", "#! profile 2 0 0 0\n"), "--steps", "5"}).code,
            exit_invalid_config);
  EXPECT_EQ(cli({"simulate", "--steps", "5", "--profile", "0", "0", "0", "0"}).code, exit_usage);
  EXPECT_EQ(cli({"simulate", "--scenario", file("ok.scenario", "0 BarrierCommand(command_close)\n"), "--steps", "5",
                 "--profile", "0", "0", "5", "0"})
                .code,
            exit_invalid_config);
}

TEST(Serve, RefusesBadSettings) {
  EXPECT_EQ(cli({"serve", "--config", "nowhere"}).code, exit_invalid_config);
  EXPECT_EQ(cli({"serve", "--monitors", "safreq99"}).code, exit_usage);
}
