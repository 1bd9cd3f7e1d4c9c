#pragma once

// The `marijke` command line: explore, check, monitor, simulate, serve, trace.
//
// Standard output carries only deterministic text (stats, reports, traces);
// wall times go to standard error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "marijke/service.hpp"
#include "marijke/verify.hpp"

namespace marijke {

enum ExitCode : int {
  exit_ok = 0,
  exit_violation = 1,
  exit_usage = 2,
  exit_missing_file = 3,
  exit_invalid_config = 4,
  exit_ceiling = 5,
  exit_malformed_trace = 6,
};

/// Thrown inside the CLI to leave with a specific exit code.
class CliExit : public Error {
public:
  CliExit(int code, const std::string& what) : Error(what), code_(code) {}
  int code() const noexcept { return code_; }

private:
  int code_;
};

/// A configuration preset or a JSON configuration file.
///
///   { "preset": "reduced", "locks": ["north"], "orientations": ["east"],
///     "barrier": true, "ceiling": 4194304, "max_states": 100000000,
///     "profile": { "sensor_fail": 0, "stuck_aspect": 0, "motor_stall": 0, "command_rate": 0 } }
///
/// Every key is optional; "preset" (default "reduced") supplies the rest.
struct RunConfig {
  std::string name = "reduced";
  PlantConfig plant = PlantConfig::reduced();
  std::uint64_t ceiling = ExploreOptions{}.ceiling;
  std::uint64_t max_states = ExploreOptions{}.max_states;
  std::optional<FaultProfile> profile;
};

namespace cli_detail {

template <class E, std::size_t N>
E enum_of(const std::array<std::string_view, N>& names, const std::string& s, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s)
      return static_cast<E>(i);
  throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

} // namespace cli_detail

inline RunConfig parse_run_config(const json& j, const std::string& name) {
  static const std::set<std::string> keys{"preset", "locks", "orientations", "barrier", "ceiling", "max_states", "profile"};
  if (!j.is_object())
    throw ConfigError("configuration file must hold a JSON object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k))
      throw ConfigError("unknown configuration key '" + k + "'");
  RunConfig rc;
  try {
    const std::string preset = j.value("preset", std::string("reduced"));
    rc.plant = config_by_name(preset);
    rc.name = name;
    if (j.contains("locks")) {
      rc.plant.locks.clear();
      for (const std::string l : j["locks"])
        rc.plant.locks.push_back(cli_detail::enum_of<LockId>(detail::lock_names, l, "lock"));
    }
    if (j.contains("orientations")) {
      rc.plant.orientations.clear();
      for (const std::string o : j["orientations"])
        rc.plant.orientations.push_back(cli_detail::enum_of<Orientation>(detail::orientation_names, o, "orientation"));
    }
    rc.plant.include_barrier = j.value("barrier", rc.plant.include_barrier);
    rc.ceiling = j.value("ceiling", rc.ceiling);
    rc.max_states = j.value("max_states", rc.max_states);
    if (j.contains("profile")) {
      const json& p = j["profile"];
      FaultProfile f;
      f.sensor_fail = p.value("sensor_fail", 0.0);
      f.stuck_aspect = p.value("stuck_aspect", 0.0);
      f.motor_stall = p.value("motor_stall", 0.0);
      f.command_rate = p.value("command_rate", 0.0);
      f.validate();
      rc.profile = f;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
  rc.plant.validate();
  return rc;
}

/// `arg` names a preset or a configuration file.
inline RunConfig load_run_config(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(arg)) {
    std::ifstream in(arg);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CliExit(exit_invalid_config, arg + ": " + e.what());
    }
    try {
      return parse_run_config(j, arg);
    } catch (const ConfigError& e) {
      throw CliExit(exit_invalid_config, arg + ": " + e.what());
    }
  }
  try {
    RunConfig rc;
    rc.plant = config_by_name(arg);
    rc.name = arg;
    return rc;
  } catch (const ConfigError&) {
    if (arg.find('/') != std::string::npos || arg.find('.') != std::string::npos)
      throw CliExit(exit_missing_file, "no such configuration file: " + arg);
    throw CliExit(exit_invalid_config, "unknown configuration preset '" + arg + "'");
  }
}

// ---------------------------------------------------------------------------

class Cli {
public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::vector<std::string> args) {
    CLI::App app{"Lock-complex controller: exploration, verification, monitoring and simulation", "marijke"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    auto* explore_cmd = app.add_subcommand("explore", "Explore the controller state graph and print statistics");
    add_config(explore_cmd);
    explore_cmd->add_option("--mode", mode_, "exhaustive, bounded or random")
        ->check(CLI::IsMember({"exhaustive", "bounded", "random"}));
    explore_cmd->add_option("--depth", depth_, "Depth for bounded mode");
    explore_cmd->add_option("--steps", steps_, "Steps for random mode");
    explore_cmd->add_option("--seed", seed_, "Seed for random mode");
    add_graph_flags(explore_cmd);

    auto* check_cmd = app.add_subcommand("check", "Verify requirements on the explored state graph");
    add_config(check_cmd);
    add_req(check_cmd, "all");
    add_graph_flags(check_cmd);
    check_cmd->add_option("--depth", depth_, "Check a bounded graph of this depth instead");
    check_cmd->add_option("--cex-dir", cex_dir_, "Directory for counterexample traces");

    auto* monitor_cmd = app.add_subcommand("monitor", "Check a trace file against the requirement monitors");
    add_config(monitor_cmd);
    add_req(monitor_cmd, "all");
    monitor_cmd->add_option("--trace", trace_file_, "Trace file")->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Random walk, or a closed-loop run of a scenario");
    simulate_cmd->add_option("--config", config_arg_, "Preset name or configuration file (default full)");
    add_req(simulate_cmd, "all-safety,all-causality");
    add_mutations(simulate_cmd);
    simulate_cmd->add_option("--scenario", scenario_file_, "Scenario file; runs the controller against the plant");
    simulate_cmd->add_option("--steps", steps_, "Random-walk steps, or plant ticks with --scenario")->required();
    simulate_cmd->add_option("--seed", sim_seed_, "Seed");
    simulate_cmd->add_option("--profile", profile_, "Fault profile: sensor_fail stuck_aspect motor_stall command_rate")
        ->expected(4);
    simulate_cmd->add_option("--trace-out", trace_out_, "Write the trace to this file ('-' for standard output)");

    auto* serve_cmd = app.add_subcommand("serve", "Run the session service");
    add_config(serve_cmd);
    add_mutations(serve_cmd);
    serve_cmd->add_option("--monitors", monitors_, "Default monitor selection for sessions");
    serve_cmd->add_option("--host", host_, "Address to bind");
    serve_cmd->add_option("--port", port_, "Port to bind")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--record-dir", record_dir_, "Record each session's trace and scenario here");

    auto* trace_cmd = app.add_subcommand("trace", "Pretty-print and validate trace files");
    add_config(trace_cmd);
    trace_cmd->add_option("files", trace_files_, "Trace files")->required();
    trace_cmd->add_flag("--replay", replay_, "Also require each trace to be a run of the controller");
    trace_cmd->add_flag("--quiet", quiet_, "Validate only");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? exit_ok : exit_usage;
    }

    try {
      if (*explore_cmd)
        return explore();
      if (*check_cmd)
        return check();
      if (*monitor_cmd)
        return monitor();
      if (*simulate_cmd)
        return simulate();
      if (*serve_cmd)
        return serve();
      if (*trace_cmd)
        return trace();
    } catch (const CliExit& e) {
      err_ << "marijke: " << e.what() << '\n';
      return e.code();
    } catch (const ExploreLimitError& e) {
      err_ << "marijke: " << e.what() << '\n';
      return e.ceiling_exceeded() ? exit_ceiling : exit_invalid_config;
    } catch (const ConfigError& e) {
      err_ << "marijke: " << e.what() << '\n';
      return exit_invalid_config;
    } catch (const Error& e) {
      err_ << "marijke: " << e.what() << '\n';
      return exit_usage;
    }
    return exit_usage;
  }

private:
  void add_config(CLI::App* c) {
    c->add_option("--config", config_arg_, "Preset name (reduced, reduced1, full) or configuration file");
  }
  void add_req(CLI::App* c, const std::string& def) {
    c->add_option("--req", req_, "Requirement ids and categories (all, all-safety, ...), comma separated; default " +
                                      def);
  }
  void add_mutations(CLI::App* c) {
    c->add_option("--mutation", mutations_, "Seeded controller mutation (repeatable)");
  }
  void add_graph_flags(CLI::App* c) {
    add_mutations(c);
    c->add_option("--threads", threads_, "Exploration threads")->check(CLI::Range(1u, 256u));
    c->add_option("--ceiling", ceiling_, "Stable-state bound above which exhaustive exploration is refused");
  }

  RunConfig config() const { return load_run_config(config_arg_.empty() ? "reduced" : config_arg_); }

  MutationSet mutation_set() const {
    MutationSet ms;
    for (const std::string& m : mutations_) {
      try {
        ms = ms.with(parse_mutation(m));
      } catch (const ParseError& e) {
        throw CliExit(exit_usage, e.what());
      }
    }
    return ms;
  }

  std::vector<const Requirement*> requirements(const std::string& def = "all") const {
    try {
      return select_requirements(req_.value_or(def));
    } catch (const Error& e) {
      throw CliExit(exit_usage, e.what());
    }
  }

  static std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in)
      throw CliExit(exit_missing_file, "cannot open " + path);
    return in;
  }

  ExploreOptions explore_options(const RunConfig& rc) const {
    ExploreOptions opt;
    opt.ceiling = ceiling_.value_or(rc.ceiling);
    opt.max_states = rc.max_states;
    opt.threads = threads_;
    return opt;
  }

  void print_stats(const StateGraph& g, bool exhaustive) {
    const GraphStats& s = g.stats();
    out_ << "stats states=" << s.states << " stable=" << s.stable_states << " edges=" << s.edges
         << " depth=" << s.depth << " exhaustive=" << (exhaustive ? "yes" : "no") << '\n';
    err_ << "time explore=" << s.seconds << "s\n";
  }

  // -- subcommands ----------------------------------------------------------

  int explore() {
    const RunConfig rc = config();
    const Controller c(rc.plant, mutation_set());
    ExploreOptions opt = explore_options(rc);
    if (mode_ == "bounded") {
      if (!depth_)
        throw CliExit(exit_usage, "--mode bounded needs --depth");
      opt.mode = ExploreMode::bounded;
      opt.depth = *depth_;
    } else if (mode_ == "random") {
      if (!steps_)
        throw CliExit(exit_usage, "--mode random needs --steps");
      opt.mode = ExploreMode::random;
      opt.steps = *steps_;
      opt.seed = seed_;
    }
    const StateGraph g = marijke::explore(c, opt);
    print_stats(g, opt.mode == ExploreMode::exhaustive);
    return exit_ok;
  }

  int check() {
    const RunConfig rc = config();
    const auto reqs = requirements();
    const Controller c(rc.plant, mutation_set());
    ExploreOptions opt = explore_options(rc);
    if (depth_) {
      opt.mode = ExploreMode::bounded;
      opt.depth = *depth_;
    }
    const StateGraph g = marijke::explore(c, opt);
    print_stats(g, !depth_);
    GraphVerifier v(g);
    Report report;
    double seconds = 0;
    for (const Requirement* r : reqs) {
      RequirementResult res = v.check(*r);
      seconds += res.seconds;
      out_ << res.entry.line() << '\n';
      if (res.entry.verdict == Verdict::violated && !res.counterexample.empty()) {
        std::filesystem::create_directories(cex_dir_);
        const auto path = std::filesystem::path(cex_dir_) / (r->id + ".trace");
        std::ofstream f(path);
        write_trace(f, res.counterexample);
        if (!f)
          throw CliExit(exit_missing_file, "cannot write " + path.string());
        out_ << "counterexample " << r->id << ' ' << path.string() << '\n';
      }
      report.push_back(res.entry);
    }
    err_ << "time check=" << seconds << "s\n";
    return all_ok(report) ? exit_ok : exit_violation;
  }

  int monitor() {
    const RunConfig rc = config();
    const auto reqs = requirements();
    std::ifstream in = open_input(trace_file_);
    std::vector<Action> trace;
    try {
      trace = read_trace(in);
      Alphabet alpha(rc.plant);
      for (std::size_t i = 0; i < trace.size(); ++i)
        if (!alpha.contains(trace[i]))
          throw ParseError("trace entry " + std::to_string(i) + " is outside the configuration: " +
                           to_string(trace[i]));
    } catch (const ParseError& e) {
      throw CliExit(exit_malformed_trace, trace_file_ + ": " + e.what());
    }
    const Report report = check_trace(trace, reqs, rc.plant);
    write_report(out_, report);
    return all_ok(report) ? exit_ok : exit_violation;
  }

  int simulate() {
    std::optional<Scenario> sc;
    if (scenario_file_) {
      std::ifstream in = open_input(*scenario_file_);
      try {
        sc = read_scenario_file(in);
      } catch (const ParseError& e) {
        throw CliExit(exit_malformed_trace, *scenario_file_ + ": " + e.what());
      } catch (const ConfigError& e) {
        throw CliExit(exit_invalid_config, *scenario_file_ + ": " + e.what());
      }
    }
    std::string cfg = config_arg_;
    if (cfg.empty())
      cfg = sc && sc->header.config ? *sc->header.config : "full";
    const RunConfig rc = load_run_config(cfg);
    const auto reqs = requirements("all-safety,all-causality");
    const MutationSet ms = mutation_set();
    const std::uint64_t seed = sim_seed_ ? *sim_seed_ : sc && sc->header.seed ? *sc->header.seed : 0;

    std::unique_ptr<std::ofstream> file;
    std::ostream* trace_out = nullptr;
    if (trace_out_ == "-")
      trace_out = &out_;
    else if (!trace_out_.empty()) {
      file = std::make_unique<std::ofstream>(trace_out_);
      if (!*file)
        throw CliExit(exit_missing_file, "cannot write " + trace_out_);
      trace_out = file.get();
    }

    const auto t0 = std::chrono::steady_clock::now();
    Report report;
    std::uint64_t actions = 0;
    std::uint64_t violations = 0;
    if (sc) {
      FaultProfile profile = rc.profile.value_or(sc->header.profile.value_or(FaultProfile{}));
      if (!profile_.empty())
        profile = {profile_[0], profile_[1], profile_[2], profile_[3]};
      profile.validate();
      ClosedLoop loop(rc.plant, ms, reqs, profile, seed);
      loop.set_record_trace(false);
      if (trace_out)
        loop.set_observer([&](std::uint64_t seq, const Action& a) { *trace_out << format_trace_line(seq, a) << '\n'; });
      try {
        violations = loop.run(sc->events, *steps_).size();
      } catch (const InvalidAction& e) {
        throw CliExit(exit_invalid_config, *scenario_file_ + ": " + e.what());
      }
      report = loop.checker().report();
      actions = loop.steps();
      out_ << "stats mode=closed-loop config=" << rc.name << " ticks=" << *steps_ << " seed=" << seed
           << " actions=" << actions << " violations=" << violations << '\n';
    } else {
      if (!profile_.empty())
        throw CliExit(exit_usage, "--profile needs --scenario");
      const Controller c(rc.plant, ms);
      RandomWalk walk(c, seed);
      TraceChecker checker(rc.plant, reqs);
      for (; actions < *steps_; ++actions) {
        const Action a = walk.step();
        if (trace_out)
          *trace_out << format_trace_line(actions, a) << '\n';
        violations += checker.feed(a).size();
      }
      report = checker.report();
      out_ << "stats mode=random-walk config=" << rc.name << " steps=" << *steps_ << " seed=" << seed
           << " violations=" << violations << '\n';
    }
    write_report(out_, report);
    err_ << "time simulate="
         << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << "s\n";
    return all_ok(report) ? exit_ok : exit_violation;
  }

  int serve() {
    SessionOptions defaults;
    defaults.config_name = config_arg_.empty() ? "reduced" : config_arg_;
    try {
      config_by_name(defaults.config_name);
    } catch (const ConfigError& e) {
      throw CliExit(exit_invalid_config, std::string(e.what()) + " (the service takes preset names only)");
    }
    defaults.monitors = monitors_;
    requirements_of(monitors_);
    defaults.mutations = mutation_set();
    if (!record_dir_.empty())
      defaults.record_dir = record_dir_;
    Service svc(defaults);
    out_ << "listening on http://" << host_ << ':' << port_ << std::endl;
    if (!svc.listen(host_, port_))
      throw CliExit(exit_usage, "cannot listen on " + host_ + ":" + std::to_string(port_));
    return exit_ok;
  }

  int trace() {
    const RunConfig rc = config();
    const Alphabet alpha(rc.plant);
    const Controller c(rc.plant);
    int status = exit_ok;
    for (const std::string& path : trace_files_) {
      std::ifstream in = open_input(path);
      std::vector<Action> t;
      try {
        t = read_trace(in);
      } catch (const ParseError& e) {
        throw CliExit(exit_malformed_trace, path + ": " + e.what());
      }
      for (std::size_t i = 0; i < t.size(); ++i)
        if (!alpha.contains(t[i]))
          throw CliExit(exit_malformed_trace,
                        path + ": entry " + std::to_string(i) + " is outside the configuration: " + to_string(t[i]));
      std::string verdict = "valid";
      if (replay_) {
        ControllerState st = c.initial_state();
        for (std::size_t i = 0; i < t.size(); ++i) {
          if (!c.is_enabled(st, t[i])) {
            verdict = "not a controller run at entry " + std::to_string(i);
            status = exit_violation;
            break;
          }
          st = c.step_unchecked(st, t[i]);
        }
      }
      if (!quiet_) {
        for (std::size_t i = 0; i < t.size(); ++i) {
          std::string kind(trace_kind(t[i]));
          kind.resize(6, ' ');
          out_ << std::setw(8) << i << "  " << kind << "  " << to_string(t[i]) << '\n';
        }
      }
      out_ << path << ": " << t.size() << " actions, " << verdict << '\n';
    }
    return status;
  }

  static void requirements_of(const std::string& selector) {
    try {
      select_requirements(selector);
    } catch (const Error& e) {
      throw CliExit(exit_usage, e.what());
    }
  }

  std::ostream& out_;
  std::ostream& err_;

  std::string config_arg_;
  std::optional<std::string> req_;
  std::vector<std::string> mutations_;
  unsigned threads_ = 1;
  std::optional<std::uint64_t> ceiling_;
  std::string mode_ = "exhaustive";
  std::optional<std::uint64_t> depth_;
  std::optional<std::uint64_t> steps_;
  std::uint64_t seed_ = 0;
  std::optional<std::uint64_t> sim_seed_;
  std::string cex_dir_ = "counterexamples";
  std::string trace_file_;
  std::optional<std::string> scenario_file_;
  std::vector<double> profile_;
  std::string trace_out_;
  std::string monitors_ = "all";
  std::string host_ = "127.0.0.1";
  int port_ = 8080;
  std::string record_dir_;
  std::vector<std::string> trace_files_;
  bool replay_ = false;
  bool quiet_ = false;
};

/// Runs the command line with `args` (without the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  return Cli(out, err).run(args);
}

} // namespace marijke
