#pragma once

// Trace files, requirement reports and trace checking.
//
// Trace line:  <seq> <input|output|read> <action-text>
// Report line: <req-id> <ok|violated|n/a> <witness-seq|-> <binding|->
//
// Blank lines and lines starting with '#' are ignored in trace files.

#include <charconv>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "marijke/catalog.hpp"

namespace marijke {

inline std::string_view trace_kind(const Action& a) {
  switch (a.role()) {
  case ActionRole::output: return "output";
  case ActionRole::read: return "read";
  default: return "input";
  }
}

inline std::string format_trace_line(std::uint64_t seq, const Action& a) {
  return std::to_string(seq) + " " + std::string(trace_kind(a)) + " " + to_string(a);
}

inline void write_trace(std::ostream& out, const std::vector<Action>& trace, std::uint64_t first_seq = 0) {
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << format_trace_line(first_seq + i, trace[i]) << '\n';
}

/// Parses a trace file. Sequence numbers must start at 0 and increase by
/// one; the kind column must agree with the action.
inline std::vector<Action> read_trace(std::istream& in) {
  std::vector<Action> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    auto fail = [&](const std::string& why) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " + why);
    };
    const std::size_t a = line.find(' ');
    const std::size_t b = a == std::string::npos ? a : line.find(' ', a + 1);
    if (b == std::string::npos)
      fail("expected '<seq> <kind> <action>'");
    std::uint64_t seq = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + a, seq);
    if (ec != std::errc() || ptr != line.data() + a)
      fail("bad sequence number");
    if (seq != out.size())
      fail("sequence number " + std::to_string(seq) + " where " + std::to_string(out.size()) + " was expected");
    Action act;
    try {
      act = parse_action(std::string_view(line).substr(b + 1));
    } catch (const ParseError& e) {
      fail(e.what());
    }
    if (line.compare(a + 1, b - a - 1, trace_kind(act)) != 0)
      fail("kind '" + line.substr(a + 1, b - a - 1) + "' does not match " + to_string(act));
    out.push_back(act);
  }
  return out;
}

inline std::vector<Action> parse_trace(const std::string& text) {
  std::istringstream in(text);
  return read_trace(in);
}

// ---------------------------------------------------------------------------
// Reports

enum class Verdict : std::uint8_t { ok, violated, not_applicable };

inline std::string_view name(Verdict v) {
  switch (v) {
  case Verdict::ok: return "ok";
  case Verdict::violated: return "violated";
  case Verdict::not_applicable: return "n/a";
  }
  return "?";
}

struct ReportEntry {
  std::string id;
  Verdict verdict = Verdict::ok;
  std::uint64_t witness = 0; ///< trace index, meaningful when violated
  std::string binding = "-";

  std::string line() const {
    return id + " " + std::string(name(verdict)) + " " +
           (verdict == Verdict::violated ? std::to_string(witness) : std::string("-")) + " " +
           (binding.empty() ? std::string("-") : binding);
  }
  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

using Report = std::vector<ReportEntry>;

inline void write_report(std::ostream& out, const Report& r) {
  for (const ReportEntry& e : r)
    out << e.line() << '\n';
}

inline bool all_ok(const Report& r) {
  for (const ReportEntry& e : r)
    if (e.verdict == Verdict::violated)
      return false;
  return true;
}

/// A fresh violation produced while feeding a trace.
struct Violation {
  std::string id;
  std::uint64_t witness;
  std::string binding;
};

/// Runs the trace monitors of a set of requirements incrementally.
/// Requirements with only graph checks report n/a.
class TraceChecker {
public:
  TraceChecker(const PlantConfig& config, std::vector<const Requirement*> reqs)
      : alphabet_(std::make_shared<Alphabet>(config)) {
    for (const Requirement* r : reqs) {
      Entry e;
      e.req = r;
      if (r->has_patterns())
        for (const SafetyPattern& p : r->patterns(config)) {
          e.patterns.push_back(std::make_shared<MonitorAutomaton>(p, *alphabet_));
          e.pattern_states.push_back(start(*e.patterns.back()));
        }
      if (r->has_obligations())
        for (ObligationSpec& s : r->obligations(config)) {
          e.automata.push_back(std::make_shared<ObligationAutomaton>(std::move(s), *alphabet_));
          e.obligations.emplace_back(*e.automata.back());
        }
      entries_.push_back(std::move(e));
    }
  }

  const Alphabet& alphabet() const { return *alphabet_; }
  std::uint64_t position() const { return index_; }

  /// Feeds the next trace action; returns requirements violated by it.
  std::vector<Violation> feed(const Action& a) {
    const std::uint32_t code = alphabet_->encode(a);
    std::vector<Violation> fresh;
    for (Entry& e : entries_) {
      const bool before = e.violated;
      for (std::size_t k = 0; k < e.patterns.size(); ++k) {
        MonitorState& s = e.pattern_states[k];
        advance(*e.patterns[k], s, code, index_);
        if (s.violated && !e.violated) {
          e.violated = true;
          e.witness = s.witness;
          e.binding = e.patterns[k]->describe(s.binding);
        }
      }
      for (std::size_t k = 0; k < e.obligations.size(); ++k) {
        ObligationMonitor& m = e.obligations[k];
        m.advance(code, index_);
        if (m.violated() && !e.violated) {
          e.violated = true;
          e.witness = m.witness();
          e.binding = e.automata[k]->spec().label;
        }
      }
      if (e.violated && !before)
        fresh.push_back({e.req->id, e.witness, e.binding});
    }
    ++index_;
    return fresh;
  }

  Report report() const {
    Report r;
    for (const Entry& e : entries_) {
      ReportEntry x;
      x.id = e.req->id;
      if (e.patterns.empty() && e.obligations.empty())
        x.verdict = Verdict::not_applicable;
      else if (e.violated) {
        x.verdict = Verdict::violated;
        x.witness = e.witness;
        x.binding = e.binding;
      }
      r.push_back(std::move(x));
    }
    return r;
  }

  /// Number of obligation triggers whose condition held, per requirement.
  std::uint64_t triggered(std::string_view id) const {
    std::uint64_t n = 0;
    for (const Entry& e : entries_)
      if (e.req->id == id)
        for (const ObligationMonitor& m : e.obligations)
          n += m.triggered();
    return n;
  }

private:
  struct Entry {
    const Requirement* req = nullptr;
    std::vector<std::shared_ptr<MonitorAutomaton>> patterns;
    std::vector<MonitorState> pattern_states;
    std::vector<std::shared_ptr<ObligationAutomaton>> automata;
    std::vector<ObligationMonitor> obligations;
    bool violated = false;
    std::uint64_t witness = 0;
    std::string binding = "-";
  };

  std::shared_ptr<Alphabet> alphabet_;
  std::vector<Entry> entries_;
  std::uint64_t index_ = 0;
};

/// Checks a whole trace against the selected requirements.
inline Report check_trace(const std::vector<Action>& trace, const std::vector<const Requirement*>& reqs,
                          const PlantConfig& config) {
  TraceChecker checker(config, reqs);
  for (const Action& a : trace)
    checker.feed(a);
  return checker.report();
}

} // namespace marijke
