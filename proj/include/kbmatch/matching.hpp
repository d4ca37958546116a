#pragma once

// Non-iterative matching over the pruned blocking graph.
//
// R1 matches unique name twins, R2 strongly similar pairs (beta >= 1), R3
// aggregates the value and neighbor candidate ranks of every node that is
// still unmatched, and R4 drops any proposal that is not reciprocated by the
// graph. An entity matched by an earlier rule is never proposed again.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kbmatch/blocking.hpp"
#include "kbmatch/error.hpp"
#include "kbmatch/graph.hpp"
#include "kbmatch/knowledge_base.hpp"
#include "kbmatch/parallel.hpp"
#include "kbmatch/statistics.hpp"

namespace kbmatch {

struct MatcherConfig {
  std::size_t k = 2;    // name attributes per KB
  std::size_t K = 15;   // candidates per node and evidence type
  std::size_t N = 3;    // top relations per entity
  double theta = 0.6;   // weight of the value ranking in R3
  double purge_fraction = 1e-2;
  bool name_discriminability = true;  // rank name attributes by support only when false

  void validate() const {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (K < 1) throw ConfigError("K must be >= 1");
    if (N < 1) throw ConfigError("N must be >= 1");
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must be in (0, 1), got " + std::to_string(theta));
    if (!(purge_fraction > 0.0 && purge_fraction <= 1.0)) {
      throw ConfigError("purge fraction must be in (0, 1], got " + std::to_string(purge_fraction));
    }
  }
};

enum class Rule : std::uint8_t { kR1 = 1, kR2 = 2, kR3 = 3 };

inline std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::kR1: return "R1";
    case Rule::kR2: return "R2";
    case Rule::kR3: return "R3";
  }
  return "?";
}

struct Match {
  EntityIndex first = 0;
  EntityIndex second = 0;
  Rule rule = Rule::kR1;
  double score = 0.0;  // alpha for R1, beta for R2, aggregate rank score for R3

  friend bool operator==(const Match&, const Match&) = default;
};

struct MatchSet {
  std::vector<Match> matches;   // ascending by (first, second)
  std::vector<Match> filtered;  // proposals removed by R4, same order

  std::size_t size() const noexcept { return matches.size(); }
};

struct RuleSelection {
  bool r1 = true;
  bool r2 = true;
  bool r3 = true;
  bool r4 = true;
};

namespace detail {

inline Match make_match(const NodeSpace& space, NodeId a, NodeId b, Rule rule, double score) {
  if (space.side(a) == Side::kSecond) std::swap(a, b);
  return {space.index(a), space.index(b), rule, score};
}

}  // namespace detail

/// Name matches. A node with alpha edges to two or more different partners
/// is ambiguous and left to the other rules.
inline std::vector<Match> rule_r1(const NodeSpace& space, const std::vector<std::vector<NodeId>>& alpha_partners,
                                  std::vector<bool>& matched) {
  std::vector<Match> out;
  for (NodeId a = 0; a < space.first_size; ++a) {
    if (alpha_partners[a].size() != 1 || matched[a]) continue;
    const NodeId b = alpha_partners[a].front();
    if (alpha_partners[b].size() != 1 || matched[b]) continue;
    matched[a] = matched[b] = true;
    out.push_back(detail::make_match(space, a, b, Rule::kR1, 1.0));
  }
  return out;
}

/// Value matches, checked from the smaller KB (the first one on a tie). The
/// top beta candidate of a node must be unmatched and reach beta >= 1. When
/// two nodes claim the same candidate the higher beta wins, then the smaller
/// node id.
inline std::vector<Match> rule_r2(const BlockingGraph& g, std::vector<bool>& matched, WorkerPool& pool) {
  const auto& space = g.space;
  const Side side = space.first_size <= space.second_size ? Side::kFirst : Side::kSecond;
  const NodeId begin = side == Side::kFirst ? 0 : static_cast<NodeId>(space.first_size);
  const std::size_t count = space.side_size(side);

  std::vector<Candidate> proposal(count, Candidate{0, -1.0});
  pool.parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t x = lo; x < hi; ++x) {
      const NodeId v = begin + static_cast<NodeId>(x);
      if (matched[v] || g.value_cands[v].empty()) continue;
      const auto& top = g.value_cands[v].front();
      if (top.weight >= 1.0 && !matched[top.node]) proposal[x] = top;
    }
  });

  std::vector<std::size_t> order;
  for (std::size_t x = 0; x < count; ++x) {
    if (proposal[x].weight >= 0.0) order.push_back(x);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return proposal[a].weight > proposal[b].weight; });
  std::vector<Match> out;
  for (auto x : order) {
    const NodeId v = begin + static_cast<NodeId>(x);
    const NodeId u = proposal[x].node;
    if (matched[u]) continue;
    matched[v] = matched[u] = true;
    out.push_back(detail::make_match(space, v, u, Rule::kR2, proposal[x].weight));
  }
  return out;
}

/// Aggregate rank scores of the candidates of `v`: a list of length L gives
/// its p-th element (0-based) (L - p) / L, weighted by theta for the value
/// list and 1 - theta for the neighbor list. Ascending by node id.
inline std::vector<Candidate> aggregate_ranks(const BlockingGraph& g, NodeId v, double theta) {
  std::vector<Candidate> agg;
  auto add = [&agg](const std::vector<Candidate>& list, double weight) {
    const double len = static_cast<double>(list.size());
    for (std::size_t p = 0; p < list.size(); ++p) {
      agg.push_back({list[p].node, weight * (len - static_cast<double>(p)) / len});
    }
  };
  add(g.value_cands[v], theta);
  add(g.ngb_cands[v], 1.0 - theta);
  std::sort(agg.begin(), agg.end(), [](const Candidate& a, const Candidate& b) { return a.node < b.node; });
  std::vector<Candidate> merged;
  for (const auto& c : agg) {
    if (!merged.empty() && merged.back().node == c.node) {
      merged.back().weight += c.weight;
    } else {
      merged.push_back(c);
    }
  }
  return merged;
}

/// Rank aggregation over every unmatched node of both KBs. Each node
/// proposes its best unmatched candidate (ties to the smaller id); the
/// proposals are then accepted greedily by score, ties by (first, second).
inline std::vector<Match> rule_r3(const BlockingGraph& g, std::vector<bool>& matched, double theta,
                                  WorkerPool& pool) {
  const auto& space = g.space;
  std::vector<Candidate> proposal(space.size(), Candidate{0, -1.0});
  pool.parallel_for(space.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t x = lo; x < hi; ++x) {
      const NodeId v = static_cast<NodeId>(x);
      if (matched[v]) continue;
      Candidate best{0, -1.0};
      for (const auto& c : aggregate_ranks(g, v, theta)) {
        if (!matched[c.node] && c.weight > best.weight) best = c;
      }
      proposal[x] = best;
    }
  });

  std::vector<Match> cands;
  for (NodeId v = 0; v < space.size(); ++v) {
    if (proposal[v].weight > 0.0) {
      cands.push_back(detail::make_match(space, v, proposal[v].node, Rule::kR3, proposal[v].weight));
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Match& a, const Match& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<Match> out;
  for (const auto& m : cands) {
    const NodeId a = space.node(Side::kFirst, m.first);
    const NodeId b = space.node(Side::kSecond, m.second);
    if (matched[a] || matched[b]) continue;
    matched[a] = matched[b] = true;
    out.push_back(m);
  }
  return out;
}

/// Keeps the proposals whose two directed edges are both in the graph.
inline MatchSet rule_r4(const BlockingGraph& g, std::vector<Match> proposals, bool enabled = true) {
  auto by_pair = [](const Match& a, const Match& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  };
  std::sort(proposals.begin(), proposals.end(), by_pair);
  MatchSet out;
  for (const auto& m : proposals) {
    const NodeId a = g.space.node(Side::kFirst, m.first);
    const NodeId b = g.space.node(Side::kSecond, m.second);
    if (!enabled || (g.has_edge(a, b) && g.has_edge(b, a))) {
      out.matches.push_back(m);
    } else {
      out.filtered.push_back(m);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  BlockCollection blocks;
  std::vector<AttributeId> name_attributes_first;
  std::vector<AttributeId> name_attributes_second;
  BlockingGraph graph;
  MatchSet matches;
  std::vector<StageTiming> timings;

  double seconds(std::string_view stage) const {
    for (const auto& t : timings) {
      if (t.stage == stage) return t.seconds;
    }
    return 0.0;
  }
  /// Wall time of the four rules.
  double matching_seconds() const { return seconds("r1") + seconds("r2") + seconds("r3") + seconds("r4"); }
  double total_seconds() const {
    double s = 0.0;
    for (const auto& t : timings) s += t.seconds;
    return s;
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Runs the selected rules on a built graph. Appends r1..r4 timings.
inline MatchSet apply_rules(const BlockingGraph& g, double theta, const RuleSelection& rules, WorkerPool& pool,
                            std::vector<StageTiming>* timings = nullptr) {
  detail::Stopwatch clock;
  auto record = [&](const char* stage) {
    const double s = clock.lap();
    if (timings) timings->push_back({stage, s});
  };
  std::vector<bool> matched(g.node_count(), false);
  std::vector<Match> proposals;
  if (rules.r1) proposals = rule_r1(g.space, g.alpha_partners, matched);
  record("r1");
  if (rules.r2) {
    auto r2 = rule_r2(g, matched, pool);
    proposals.insert(proposals.end(), r2.begin(), r2.end());
  }
  record("r2");
  if (rules.r3) {
    auto r3 = rule_r3(g, matched, theta, pool);
    proposals.insert(proposals.end(), r3.begin(), r3.end());
  }
  record("r3");
  auto out = rule_r4(g, std::move(proposals), rules.r4);
  record("r4");
  return out;
}

/// Statistics and blocking, then beta and gamma weighting, pruning and the
/// rules. Stages are separated by barriers; within the first stage name
/// blocking, token blocking and top-neighbor extraction run side by side.
inline PipelineResult build_graph(const KnowledgeBase& first, const KnowledgeBase& second,
                                  const MatcherConfig& config, WorkerPool& pool) {
  config.validate();
  PipelineResult r;
  detail::Stopwatch clock;

  std::vector<std::pair<EntityIndex, EntityIndex>> alpha;
  TopNeighbors tn;
  pool.run_all({
      [&] {
        r.name_attributes_first = top_k_name_attributes(first, config.k, config.name_discriminability);
        r.name_attributes_second = top_k_name_attributes(second, config.k, config.name_discriminability);
        r.blocks.name_blocks = name_blocking(first, second, r.name_attributes_first, r.name_attributes_second);
        alpha = alpha_edges(r.blocks.name_blocks);
      },
      [&] {
        auto purged = purge_blocks(token_blocking(first, second), config.purge_fraction, first.size(), second.size());
        r.blocks.token_blocks = std::move(purged.retained);
        r.blocks.purged_keys = std::move(purged.purged_keys);
      },
      [&] { tn = top_in_neighbors(first, second, relation_stats(first), relation_stats(second), config.N); },
  });
  r.timings.push_back({"blocking", clock.lap()});

  const NodeSpace space{first.size(), second.size()};
  const TokenBlockIndex index(first, second, r.blocks.token_blocks);
  auto beta = beta_weights(first, second, index, config.K, neighbor_hubs(tn), pool);
  r.timings.push_back({"beta", clock.lap()});

  auto ngb = gamma_weights(beta.rows, tn, space, config.K, pool);
  beta.rows = {};
  r.timings.push_back({"gamma", clock.lap()});

  const EdgeWeigher weigher(first, second, index, tn);
  r.graph = prune(space, alpha, std::move(beta.value_cands), std::move(ngb), weigher, pool);
  r.timings.push_back({"prune", clock.lap()});
  return r;
}

inline PipelineResult run_pipeline(const KnowledgeBase& first, const KnowledgeBase& second,
                                   const MatcherConfig& config, WorkerPool& pool, const RuleSelection& rules = {}) {
  auto r = build_graph(first, second, config, pool);
  r.matches = apply_rules(r.graph, config.theta, rules, pool, &r.timings);
  return r;
}

inline PipelineResult run_pipeline(const KnowledgeBase& first, const KnowledgeBase& second,
                                   const MatcherConfig& config = {}) {
  WorkerPool pool(1);
  return run_pipeline(first, second, config, pool);
}

}  // namespace kbmatch
