#pragma once

// The pruned disjunctive blocking graph.
//
// Nodes are the descriptions of both KBs: first-KB entity i is node i,
// second-KB entity j is node |E1| + j. Every node keeps two candidate lists
// (top-K by value evidence beta, top-K by neighbor evidence gamma) and a set
// of directed out-edges labelled (alpha, beta, gamma). The full candidate
// graph is never materialized; weights are accumulated per node from the
// token blocks.
//
// All per-node work writes into that node's own slot and visits its inputs
// in ascending id order, so the floating-point sums and the resulting graph
// do not depend on the number of workers.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "kbmatch/blocking.hpp"
#include "kbmatch/knowledge_base.hpp"
#include "kbmatch/parallel.hpp"
#include "kbmatch/statistics.hpp"

namespace kbmatch {

using NodeId = std::uint32_t;

struct NodeSpace {
  std::size_t first_size = 0;
  std::size_t second_size = 0;

  std::size_t size() const noexcept { return first_size + second_size; }
  NodeId node(Side s, EntityIndex i) const noexcept {
    return s == Side::kFirst ? i : static_cast<NodeId>(first_size + i);
  }
  Side side(NodeId v) const noexcept { return v < first_size ? Side::kFirst : Side::kSecond; }
  EntityIndex index(NodeId v) const noexcept {
    return v < first_size ? v : static_cast<EntityIndex>(v - first_size);
  }
  std::size_t side_size(Side s) const noexcept { return s == Side::kFirst ? first_size : second_size; }
};

struct Candidate {
  NodeId node = 0;
  double weight = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

using CandidateLists = std::vector<std::vector<Candidate>>;

struct EdgeLabel {
  std::uint8_t alpha = 0;
  double beta = 0.0;
  double gamma = 0.0;

  bool trivial() const noexcept { return alpha == 0 && beta == 0.0 && gamma == 0.0; }
  friend bool operator==(const EdgeLabel&, const EdgeLabel&) = default;
};

struct Edge {
  NodeId target = 0;
  EdgeLabel label;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Highest weight first; equal weights by ascending node id. Zero weights
/// are dropped.
inline std::vector<Candidate> top_candidates(std::span<const Candidate> row, std::size_t k) {
  std::vector<Candidate> out;
  out.reserve(row.size());
  for (const auto& c : row) {
    if (c.weight > 0.0) out.push_back(c);
  }
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.node < b.node;
  };
  if (out.size() > k) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), better);
    out.resize(k);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Name evidence

/// Pairs (first-KB entity, second-KB entity) of every name block that holds
/// exactly one entity of each KB. Sorted.
inline std::vector<std::pair<EntityIndex, EntityIndex>> alpha_edges(std::span<const Block> name_blocks) {
  std::vector<std::pair<EntityIndex, EntityIndex>> out;
  for (const auto& b : name_blocks) {
    if (b.comparisons() == 1) out.emplace_back(b.first.front(), b.second.front());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Value evidence

namespace detail {

// Dense accumulator over the nodes of one side, reset by touched list.
class Accumulator {
 public:
  explicit Accumulator(std::size_t n) : sums_(n, 0.0), seen_(n, 0) {}

  void add(std::size_t slot, double w) {
    if (!seen_[slot]) {
      seen_[slot] = 1;
      touched_.push_back(slot);
    }
    sums_[slot] += w;
  }

  /// Moves the accumulated values out as (offset + slot, sum), ascending.
  std::vector<Candidate> take(std::size_t offset) {
    std::sort(touched_.begin(), touched_.end());
    std::vector<Candidate> row;
    row.reserve(touched_.size());
    for (auto s : touched_) {
      row.push_back({static_cast<NodeId>(offset + s), sums_[s]});
      sums_[s] = 0.0;
      seen_[s] = 0;
    }
    touched_.clear();
    return row;
  }

 private:
  std::vector<double> sums_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::size_t> touched_;
};

}  // namespace detail

/// Full beta row of one node: every node of the other KB sharing a retained
/// token block with it, with beta = sum over shared blocks of
/// 1 / log2(|b1| * |b2| + 1). Ascending by node id.
inline std::vector<Candidate> beta_row(const KnowledgeBase& kb, const TokenBlockIndex& index, const NodeSpace& space,
                                       NodeId v, detail::Accumulator& acc) {
  const Side s = space.side(v);
  const Side o = other(s);
  for (auto t : kb.tokens(space.index(v))) {
    const auto b = index.block_of(s, t);
    if (b == TokenBlockIndex::kNone) continue;
    const auto& blk = index.blocks()[static_cast<std::size_t>(b)];
    const double w = token_weight(blk.first.size(), blk.second.size());
    for (auto u : index.members(static_cast<std::size_t>(b), o)) acc.add(u, w);
  }
  return acc.take(o == Side::kFirst ? 0 : space.first_size);
}

struct BetaResult {
  CandidateLists value_cands;  // top-K per node by beta
  CandidateLists rows;         // full rows, only for nodes with keep_row set
};

/// Value evidence for every node of both KBs.
inline BetaResult beta_weights(const KnowledgeBase& first, const KnowledgeBase& second,
                               const TokenBlockIndex& index, std::size_t k, const std::vector<bool>& keep_row,
                               WorkerPool& pool) {
  const NodeSpace space{first.size(), second.size()};
  BetaResult out;
  out.value_cands.resize(space.size());
  out.rows.resize(space.size());
  pool.parallel_for(space.size(), [&](std::size_t begin, std::size_t end) {
    detail::Accumulator acc_first(space.first_size);
    detail::Accumulator acc_second(space.second_size);
    for (std::size_t v = begin; v < end; ++v) {
      const NodeId node = static_cast<NodeId>(v);
      const bool in_first = space.side(node) == Side::kFirst;
      auto row = beta_row(in_first ? first : second, index, space, node, in_first ? acc_second : acc_first);
      out.value_cands[v] = top_candidates(row, k);
      if (!keep_row.empty() && keep_row[v]) out.rows[v] = std::move(row);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Neighbor evidence

struct TopNeighbors {
  std::vector<std::vector<NodeId>> forward;  // topNneighbors per node, ascending
  std::vector<std::vector<NodeId>> reverse;  // topInNeighbors per node, ascending
};

/// topNneighbors of every node of both KBs and their reverse mapping.
inline TopNeighbors top_in_neighbors(const KnowledgeBase& first, const KnowledgeBase& second,
                                     const RelationStatsTable& stats_first, const RelationStatsTable& stats_second,
                                     std::size_t n) {
  const NodeSpace space{first.size(), second.size()};
  TopNeighbors tn;
  tn.forward.resize(space.size());
  tn.reverse.resize(space.size());
  for (NodeId v = 0; v < space.size(); ++v) {
    const Side s = space.side(v);
    const auto& kb = s == Side::kFirst ? first : second;
    const auto& st = s == Side::kFirst ? stats_first : stats_second;
    for (auto ne : top_n_neighbors(kb, space.index(v), st, n)) tn.forward[v].push_back(space.node(s, ne));
  }
  // v is visited in ascending order, so every reverse list comes out sorted.
  for (NodeId v = 0; v < space.size(); ++v) {
    for (auto ne : tn.forward[v]) tn.reverse[ne].push_back(v);
  }
  return tn;
}

/// Nodes whose full beta row the gamma stage needs: those that are a top
/// neighbor of someone.
inline std::vector<bool> neighbor_hubs(const TopNeighbors& tn) {
  std::vector<bool> keep(tn.reverse.size(), false);
  for (std::size_t v = 0; v < keep.size(); ++v) keep[v] = !tn.reverse[v].empty();
  return keep;
}

/// Full gamma rows: gamma(a, b) = sum over ne_a in topN(a), ne_b in topN(b)
/// of beta(ne_a, ne_b), for every pair with a non-zero sum. Each pair of
/// neighbors (ne_a, ne_b) with beta > 0 thus adds its beta to every pair of
/// their top in-neighbors. Computed by pulling from the node's own top
/// neighbors, so each node's row is owned by one task.
inline CandidateLists gamma_rows(const CandidateLists& beta_rows, const TopNeighbors& tn, const NodeSpace& space,
                                 WorkerPool& pool) {
  CandidateLists out(space.size());
  pool.parallel_for(space.size(), [&](std::size_t begin, std::size_t end) {
    detail::Accumulator acc_first(space.first_size);
    detail::Accumulator acc_second(space.second_size);
    for (std::size_t v = begin; v < end; ++v) {
      const NodeId a = static_cast<NodeId>(v);
      if (tn.forward[a].empty()) continue;
      const bool in_first = space.side(a) == Side::kFirst;
      auto& acc = in_first ? acc_second : acc_first;
      const std::size_t offset = in_first ? space.first_size : 0;
      for (auto ne_a : tn.forward[a]) {
        for (const auto& [ne_b, beta] : beta_rows[ne_a]) {
          for (auto b : tn.reverse[ne_b]) acc.add(b - offset, beta);
        }
      }
      out[v] = acc.take(offset);
    }
  });
  return out;
}

/// Top-K neighbor candidates of every node.
inline CandidateLists gamma_weights(const CandidateLists& beta_rows, const TopNeighbors& tn, const NodeSpace& space,
                                    std::size_t k, WorkerPool& pool) {
  auto rows = gamma_rows(beta_rows, tn, space, pool);
  pool.parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) rows[v] = top_candidates(rows[v], k);
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Pruned graph

/// Exact beta and gamma of arbitrary cross-KB pairs, for labelling edges that
/// did not come out of the corresponding top-K list.
class EdgeWeigher {
 public:
  EdgeWeigher(const KnowledgeBase& first, const KnowledgeBase& second, const TokenBlockIndex& index,
              const TopNeighbors& tn)
      : first_(&first), second_(&second), index_(&index), tn_(&tn), space_{first.size(), second.size()} {}

  /// Sum over retained token blocks shared by the two nodes.
  double beta(NodeId v, NodeId u) const {
    const Side s = space_.side(v);
    const auto& kb = s == Side::kFirst ? *first_ : *second_;
    const EntityIndex target = space_.index(u);
    double sum = 0.0;
    for (auto t : kb.tokens(space_.index(v))) {
      const auto b = index_->block_of(s, t);
      if (b == TokenBlockIndex::kNone) continue;
      const auto& members = index_->members(static_cast<std::size_t>(b), other(s));
      if (std::binary_search(members.begin(), members.end(), target)) {
        const auto& blk = index_->blocks()[static_cast<std::size_t>(b)];
        sum += token_weight(blk.first.size(), blk.second.size());
      }
    }
    return sum;
  }

  double gamma(NodeId v, NodeId u) const {
    double sum = 0.0;
    for (auto nv : tn_->forward[v]) {
      for (auto nu : tn_->forward[u]) sum += beta(nv, nu);
    }
    return sum;
  }

  const NodeSpace& space() const noexcept { return space_; }

 private:
  const KnowledgeBase* first_;
  const KnowledgeBase* second_;
  const TokenBlockIndex* index_;
  const TopNeighbors* tn_;
  NodeSpace space_;
};

class BlockingGraph {
 public:
  NodeSpace space;
  CandidateLists value_cands;                     // by descending beta
  CandidateLists ngb_cands;                       // by descending gamma
  std::vector<std::vector<NodeId>> alpha_partners;  // ascending
  std::vector<std::vector<Edge>> out;             // ascending target

  std::size_t node_count() const noexcept { return space.size(); }

  const Edge* find_edge(NodeId from, NodeId to) const {
    const auto& edges = out[from];
    auto it = std::lower_bound(edges.begin(), edges.end(), to,
                               [](const Edge& e, NodeId t) { return e.target < t; });
    return it != edges.end() && it->target == to ? &*it : nullptr;
  }

  bool has_edge(NodeId from, NodeId to) const { return find_edge(from, to) != nullptr; }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& e : out) n += e.size();
    return n;
  }

  std::size_t alpha_edge_count() const {
    std::size_t n = 0;
    for (const auto& a : alpha_partners) n += a.size();
    return n;
  }
};

/// Directed pruned graph: the out-edges of a node are the union of its
/// alpha partners, its top-K beta candidates and its top-K gamma candidates.
/// Every edge carries its full (alpha, beta, gamma) label; edges whose label
/// would be (0, 0, 0) are dropped.
inline BlockingGraph prune(const NodeSpace& space, std::span<const std::pair<EntityIndex, EntityIndex>> alpha,
                           CandidateLists value_cands, CandidateLists ngb_cands, const EdgeWeigher& weigher,
                           WorkerPool& pool) {
  BlockingGraph g;
  g.space = space;
  g.value_cands = std::move(value_cands);
  g.ngb_cands = std::move(ngb_cands);
  g.alpha_partners.resize(space.size());
  for (const auto& [i, j] : alpha) {
    const NodeId a = space.node(Side::kFirst, i);
    const NodeId b = space.node(Side::kSecond, j);
    g.alpha_partners[a].push_back(b);
    g.alpha_partners[b].push_back(a);
  }
  for (auto& p : g.alpha_partners) std::sort(p.begin(), p.end());

  g.out.resize(space.size());
  pool.parallel_for(space.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const NodeId from = static_cast<NodeId>(v);
      std::vector<NodeId> targets(g.alpha_partners[v]);
      for (const auto& c : g.value_cands[v]) targets.push_back(c.node);
      for (const auto& c : g.ngb_cands[v]) targets.push_back(c.node);
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

      auto& edges = g.out[v];
      edges.reserve(targets.size());
      for (auto to : targets) {
        Edge e{to, {}};
        e.label.alpha = std::binary_search(g.alpha_partners[v].begin(), g.alpha_partners[v].end(), to) ? 1 : 0;
        auto in_list = [to](const std::vector<Candidate>& list) -> const Candidate* {
          for (const auto& c : list) {
            if (c.node == to) return &c;
          }
          return nullptr;
        };
        const auto* vc = in_list(g.value_cands[v]);
        e.label.beta = vc ? vc->weight : weigher.beta(from, to);
        const auto* nc = in_list(g.ngb_cands[v]);
        e.label.gamma = nc ? nc->weight : weigher.gamma(from, to);
        if (!e.label.trivial()) edges.push_back(e);
      }
    }
  });
  return g;
}

/// Line-oriented dump: src, dst, alpha, beta, gamma (tab-separated URIs).
inline void write_graph(std::ostream& os, const BlockingGraph& g, const KnowledgeBase& first,
                        const KnowledgeBase& second) {
  auto uri = [&](NodeId v) -> const std::string& {
    return g.space.side(v) == Side::kFirst ? first.uri(g.space.index(v)) : second.uri(g.space.index(v));
  };
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (const auto& e : g.out[v]) {
      os << uri(v) << '\t' << uri(e.target) << '\t' << int(e.label.alpha) << '\t' << e.label.beta << '\t'
         << e.label.gamma << '\n';
    }
  }
}

}  // namespace kbmatch
