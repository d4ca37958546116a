#pragma once

// Pairwise precision / recall / F1 against a 1-to-1 ground truth, the rule
// ablation suite, and report rendering (JSON and a plain-text table).

#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kbmatch/blocking.hpp"
#include "kbmatch/matching.hpp"
#include "kbmatch/triples.hpp"

namespace kbmatch {

/// Percentages in [0, 100].
struct Metrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline Metrics compute_metrics(std::size_t true_positives, std::size_t predicted, std::size_t truth) {
  Metrics m;
  m.true_positives = true_positives;
  m.false_positives = predicted - true_positives;
  m.false_negatives = truth - true_positives;
  m.precision = predicted ? 100.0 * static_cast<double>(true_positives) / static_cast<double>(predicted) : 0.0;
  m.recall = truth ? 100.0 * static_cast<double>(true_positives) / static_cast<double>(truth) : 0.0;
  m.f1 = harmonic_mean(m.precision, m.recall);
  return m;
}

struct RuleBreakdown {
  Rule rule = Rule::kR1;
  std::size_t matches = 0;
  std::size_t true_positives = 0;
};

struct EvalReport {
  Metrics metrics;
  std::vector<RuleBreakdown> per_rule;  // R1, R2, R3
  std::size_t filtered = 0;             // proposals dropped by R4
  std::vector<StageTiming> timings;

  const RuleBreakdown& rule(Rule r) const { return per_rule[static_cast<std::size_t>(r) - 1]; }
};

inline EvalReport score_matches(const MatchSet& matches, const ResolvedTruth& truth) {
  EvalReport report;
  report.per_rule = {{Rule::kR1, 0, 0}, {Rule::kR2, 0, 0}, {Rule::kR3, 0, 0}};
  std::size_t tp = 0;
  for (const auto& m : matches.matches) {
    auto& r = report.per_rule[static_cast<std::size_t>(m.rule) - 1];
    ++r.matches;
    if (truth.contains(m.first, m.second)) {
      ++tp;
      ++r.true_positives;
    }
  }
  report.metrics = compute_metrics(tp, matches.matches.size(), truth.size());
  report.filtered = matches.filtered.size();
  return report;
}

inline EvalReport evaluate(const PipelineResult& run, const ResolvedTruth& truth) {
  auto report = score_matches(run.matches, truth);
  report.timings = run.timings;
  return report;
}

struct AblationRow {
  std::string name;
  RuleSelection rules;
  EvalReport report;
};

/// The rule suite: each of R1, R2, R3 alone, everything but R4, everything
/// but R3 ("no_neighbors"), and the full pipeline. The graph is built once.
inline std::vector<AblationRow> rule_ablation(const KnowledgeBase& first, const KnowledgeBase& second,
                                              const MatcherConfig& config, const ResolvedTruth& truth,
                                              WorkerPool& pool) {
  const auto built = build_graph(first, second, config, pool);
  std::vector<AblationRow> rows = {
      {"R1", {true, false, false, false}, {}},         {"R2", {false, true, false, false}, {}},
      {"R3", {false, false, true, false}, {}},         {"no_R4", {true, true, true, false}, {}},
      {"no_neighbors", {true, true, false, true}, {}}, {"full", {true, true, true, true}, {}},
  };
  for (auto& row : rows) {
    std::vector<StageTiming> timings = built.timings;
    auto matches = apply_rules(built.graph, config.theta, row.rules, pool, &timings);
    row.report = score_matches(matches, truth);
    row.report.timings = std::move(timings);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline nlohmann::json to_json(const Metrics& m) {
  return {{"precision", m.precision},           {"recall", m.recall},
          {"f1", m.f1},                         {"true_positives", m.true_positives},
          {"false_positives", m.false_positives}, {"false_negatives", m.false_negatives}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j = to_json(r.metrics);
  j["filtered_by_r4"] = r.filtered;
  nlohmann::json rules = nlohmann::json::object();
  for (const auto& b : r.per_rule) {
    rules[std::string(rule_name(b.rule))] = {{"matches", b.matches}, {"true_positives", b.true_positives}};
  }
  j["per_rule"] = rules;
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& t : r.timings) timings[t.stage] = t.seconds;
  j["timings"] = timings;
  return j;
}

inline nlohmann::json to_json(const BlockStats& s) {
  return {{"name_blocks", s.name_blocks},
          {"token_blocks", s.token_blocks},
          {"purged_token_blocks", s.purged_blocks},
          {"name_comparisons", s.name_comparisons},
          {"token_comparisons", s.token_comparisons},
          {"cartesian_comparisons", s.cartesian},
          {"covered_matches", s.covered},
          {"ground_truth", s.truth_size},
          {"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1}};
}

inline void write_report_text(std::ostream& os, const EvalReport& r) {
  const auto& m = r.metrics;
  os << "precision  " << format_percent(m.precision) << "\n"
     << "recall     " << format_percent(m.recall) << "\n"
     << "f1         " << format_percent(m.f1) << "\n"
     << "tp/fp/fn   " << m.true_positives << "/" << m.false_positives << "/" << m.false_negatives << "\n"
     << "r4 removed " << r.filtered << "\n\n"
     << "rule  matches  true_positives\n";
  for (const auto& b : r.per_rule) {
    os << rule_name(b.rule) << "    " << b.matches << "  " << b.true_positives << "\n";
  }
  if (!r.timings.empty()) {
    os << "\nstage      seconds\n";
    for (const auto& t : r.timings) os << t.stage << "  " << t.seconds << "\n";
  }
}

inline void write_ablation_text(std::ostream& os, const std::vector<AblationRow>& rows) {
  os << "rules          precision  recall  f1\n";
  for (const auto& row : rows) {
    os << row.name << std::string(row.name.size() < 15 ? 15 - row.name.size() : 1, ' ')
       << format_percent(row.report.metrics.precision) << "  " << format_percent(row.report.metrics.recall) << "  "
       << format_percent(row.report.metrics.f1) << "\n";
  }
}

inline void write_matches(std::ostream& os, const MatchSet& matches, const KnowledgeBase& first,
                          const KnowledgeBase& second) {
  for (const auto& m : matches.matches) {
    os << first.uri(m.first) << '\t' << second.uri(m.second) << '\t' << rule_name(m.rule) << '\n';
  }
}

}  // namespace kbmatch
