#pragma once

// Checking catalog requirements against an explored graph.
//
// On a graph that is not exhaustive (bounded or random exploration), safety
// and burst obligations are still checked and any violation found is real;
// a burst cut off by the depth bound counts as discharged. Liveness needs
// the whole graph: a liveness requirement reports n/a there unless one of
// its obligations is violated.

#include <chrono>
#include <memory>

#include "marijke/checker.hpp"
#include "marijke/trace.hpp"

namespace marijke {

struct RequirementResult {
  ReportEntry entry;
  std::vector<Action> counterexample; ///< from the initial state
  std::uint64_t triggers = 0;         ///< obligation triggers whose condition held
  std::uint64_t scoped_edges = 0;     ///< liveness scope size
  double seconds = 0;
};

class GraphVerifier {
public:
  explicit GraphVerifier(const StateGraph& g) : g_(&g) {}

  const StateGraph& graph() const noexcept { return *g_; }

  RequirementResult check(const Requirement& r) {
    const auto t0 = std::chrono::steady_clock::now();
    const PlantConfig& config = g_->controller().config();
    const Alphabet& alpha = g_->controller().alphabet();
    RequirementResult out;
    out.entry.id = r.id;
    bool checked = false;
    auto fail = [&](std::vector<Action> path, std::uint64_t witness, std::string binding) {
      out.entry.verdict = Verdict::violated;
      out.entry.witness = witness;
      out.entry.binding = std::move(binding);
      out.counterexample = std::move(path);
    };
    auto open = [&] { return out.entry.verdict != Verdict::violated; };

    if (r.has_patterns()) {
      checked = true;
      for (const SafetyPattern& p : r.patterns(config)) {
        MonitorAutomaton m(p, alpha);
        SafetyResult s = check_safety_product(*g_, m);
        if (!s.holds && open()) {
          const std::uint64_t at = s.counterexample.empty() ? 0 : s.counterexample.size() - 1;
          fail(std::move(s.counterexample), at, s.binding_text);
        }
      }
    }
    if (r.has_obligations()) {
      checked = true;
      for (ObligationSpec& spec : r.obligations(config)) {
        const std::string label = spec.label;
        ObligationAutomaton m(std::move(spec), alpha);
        InevitabilityResult s = check_inevitability(*g_, m);
        out.triggers += s.triggers;
        if (!s.holds && open())
          fail(std::move(s.counterexample), s.trigger_index, label);
      }
    }
    if (r.has_liveness() && g_->exhaustive()) {
      checked = true;
      if (!rev_)
        rev_ = std::make_unique<ReverseGraph>(*g_);
      for (const LivenessSpec& spec : r.liveness(config)) {
        LivenessResult s = check_liveness(*g_, *rev_, paths(), spec);
        out.scoped_edges += s.scoped_edges;
        if (!s.holds && open()) {
          const std::uint64_t at = s.witness.size();
          const std::string goal = "goal=" + std::to_string(s.failing_goal);
          fail(std::move(s.witness), at, spec.label == "-" ? goal : spec.label + "," + goal);
        }
      }
    }
    if (!checked || (r.has_liveness() && !g_->exhaustive() && open()))
      out.entry.verdict = Verdict::not_applicable;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }

  std::vector<RequirementResult> check(const std::vector<const Requirement*>& reqs) {
    std::vector<RequirementResult> out;
    for (const Requirement* r : reqs)
      out.push_back(check(*r));
    return out;
  }

  /// Shortest-path tree from the initial state, built on first use.
  const PathTree& paths() {
    if (!paths_)
      paths_ = std::make_unique<PathTree>(*g_);
    return *paths_;
  }

private:
  const StateGraph* g_;
  std::unique_ptr<PathTree> paths_;
  std::unique_ptr<ReverseGraph> rev_;
};

inline Report report_of(const std::vector<RequirementResult>& results) {
  Report r;
  for (const RequirementResult& x : results)
    r.push_back(x.entry);
  return r;
}

} // namespace marijke
