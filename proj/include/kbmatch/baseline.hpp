#pragma once

// Value-only baseline: token n-gram profiles, TF or TF-IDF weights, one of
// four similarity functions, and Unique Mapping Clustering at a threshold.
// The grid search tries every combination and keeps the best F1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbmatch/blocking.hpp"
#include "kbmatch/error.hpp"
#include "kbmatch/evaluation.hpp"
#include "kbmatch/knowledge_base.hpp"
#include "kbmatch/parallel.hpp"
#include "kbmatch/text.hpp"
#include "kbmatch/triples.hpp"

namespace kbmatch {

enum class Weighting : std::uint8_t { kTF, kTFIDF };
enum class Similarity : std::uint8_t { kCosine, kJaccard, kGeneralizedJaccard, kSigma };

inline std::string_view weighting_name(Weighting w) { return w == Weighting::kTF ? "tf" : "tfidf"; }

inline std::string_view similarity_name(Similarity s) {
  switch (s) {
    case Similarity::kCosine: return "cosine";
    case Similarity::kJaccard: return "jaccard";
    case Similarity::kGeneralizedJaccard: return "generalized_jaccard";
    case Similarity::kSigma: return "sigma";
  }
  return "?";
}

struct BslVariant {
  int ngram = 1;
  Weighting weighting = Weighting::kTF;
  Similarity similarity = Similarity::kCosine;

  void validate() const {
    if (ngram < 1 || ngram > 3) throw ConfigError("n-gram size must be 1, 2 or 3");
    if (similarity == Similarity::kSigma && weighting != Weighting::kTFIDF) {
      throw ConfigError("sigma similarity requires TF-IDF weights");
    }
  }
};

struct BslConfig {
  BslVariant variant;
  double threshold = 0.0;
};

/// The 21 valid (n, weighting, similarity) combinations.
inline std::vector<BslVariant> bsl_variants() {
  std::vector<BslVariant> out;
  for (int n = 1; n <= 3; ++n) {
    for (auto w : {Weighting::kTF, Weighting::kTFIDF}) {
      for (auto s : {Similarity::kCosine, Similarity::kJaccard, Similarity::kGeneralizedJaccard, Similarity::kSigma}) {
        if (s == Similarity::kSigma && w != Weighting::kTFIDF) continue;
        out.push_back({n, w, s});
      }
    }
  }
  return out;
}

/// 0.00, 0.05, ..., 0.95.
inline std::vector<double> bsl_thresholds() {
  std::vector<double> out;
  for (int i = 0; i < 20; ++i) out.push_back(i * 0.05);
  return out;
}

inline std::vector<BslConfig> bsl_grid() {
  std::vector<BslConfig> out;
  for (const auto& v : bsl_variants()) {
    for (double t : bsl_thresholds()) out.push_back({v, t});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles

struct WeightedProfile {
  std::vector<std::pair<std::uint32_t, double>> weights;  // ascending gram id
  double norm = 0.0;                                      // Euclidean
  double sum = 0.0;
};

struct ProfileSet {
  std::vector<WeightedProfile> first;
  std::vector<WeightedProfile> second;
  std::size_t vocabulary = 0;
};

/// Token n-grams of one literal value. A value shorter than n tokens yields
/// the whole value as a single gram.
inline std::vector<std::string> token_ngrams(std::string_view value, int n) {
  const auto tokens = tokenize(value);
  std::vector<std::string> out;
  if (tokens.empty()) return out;
  const std::size_t width = static_cast<std::size_t>(n);
  if (tokens.size() < width) {
    std::string g = tokens[0];
    for (std::size_t i = 1; i < tokens.size(); ++i) g += ' ' + tokens[i];
    out.push_back(std::move(g));
    return out;
  }
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t k = 1; k < width; ++k) g += ' ' + tokens[i + k];
    out.push_back(std::move(g));
  }
  return out;
}

/// TF is gram frequency over the entity's gram count; IDF is
/// log(D / df) with both KBs' entities as the D documents.
inline ProfileSet build_profiles(const KnowledgeBase& first, const KnowledgeBase& second, int n,
                                 Weighting weighting) {
  std::unordered_map<std::string, std::uint32_t> dictionary;
  std::vector<std::size_t> df;
  auto raw = [&](const KnowledgeBase& kb) {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> out(kb.size());
    for (EntityIndex i = 0; i < kb.size(); ++i) {
      std::vector<std::uint32_t> grams;
      for (const auto& l : kb.entity(i).literals) {
        for (auto& g : token_ngrams(l.value, n)) {
          auto [it, fresh] = dictionary.try_emplace(std::move(g), static_cast<std::uint32_t>(dictionary.size()));
          if (fresh) df.push_back(0);
          grams.push_back(it->second);
        }
      }
      std::sort(grams.begin(), grams.end());
      const double total = static_cast<double>(grams.size());
      auto& row = out[i];
      for (std::size_t x = 0; x < grams.size();) {
        std::size_t y = x;
        while (y < grams.size() && grams[y] == grams[x]) ++y;
        row.emplace_back(grams[x], static_cast<double>(y - x) / total);
        ++df[grams[x]];
        x = y;
      }
    }
    return out;
  };
  auto a = raw(first);
  auto b = raw(second);

  const double docs = static_cast<double>(first.size() + second.size());
  auto finish = [&](std::vector<std::vector<std::pair<std::uint32_t, double>>>& rows) {
    std::vector<WeightedProfile> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto& p = out[i];
      p.weights = std::move(rows[i]);
      for (auto& [g, w] : p.weights) {
        if (weighting == Weighting::kTFIDF) w *= std::log(docs / static_cast<double>(df[g]));
        p.norm += w * w;
        p.sum += w;
      }
      p.norm = std::sqrt(p.norm);
    }
    return out;
  };
  ProfileSet set;
  set.first = finish(a);
  set.second = finish(b);
  set.vocabulary = dictionary.size();
  return set;
}

/// Similarity in [0, 1]. Sigma is sum over shared grams of (w1 + w2) over
/// the total weight of both profiles.
inline double pair_similarity(const WeightedProfile& p, const WeightedProfile& q, Similarity s) {
  double dot = 0.0, min_sum = 0.0, max_sum = 0.0, shared_weight = 0.0;
  std::size_t shared = 0;
  auto x = p.weights.begin();
  auto y = q.weights.begin();
  while (x != p.weights.end() || y != q.weights.end()) {
    if (y == q.weights.end() || (x != p.weights.end() && x->first < y->first)) {
      max_sum += x->second;
      ++x;
    } else if (x == p.weights.end() || y->first < x->first) {
      max_sum += y->second;
      ++y;
    } else {
      ++shared;
      dot += x->second * y->second;
      min_sum += std::min(x->second, y->second);
      max_sum += std::max(x->second, y->second);
      shared_weight += x->second + y->second;
      ++x;
      ++y;
    }
  }
  switch (s) {
    case Similarity::kCosine:
      return p.norm > 0 && q.norm > 0 ? std::min(1.0, dot / (p.norm * q.norm)) : 0.0;
    case Similarity::kJaccard: {
      const std::size_t uni = p.weights.size() + q.weights.size() - shared;
      return uni ? static_cast<double>(shared) / static_cast<double>(uni) : 0.0;
    }
    case Similarity::kGeneralizedJaccard:
      return max_sum > 0 ? min_sum / max_sum : 0.0;
    case Similarity::kSigma: {
      const double total = p.sum + q.sum;
      return total > 0 ? shared_weight / total : 0.0;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Candidates and clustering

struct ScoredPair {
  EntityIndex first = 0;
  EntityIndex second = 0;
  double score = 0.0;

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

/// Every cross-KB pair that shares a name block or a retained token block,
/// ascending. Neighbor evidence is not used.
inline std::vector<std::pair<EntityIndex, EntityIndex>> bsl_candidates(const KnowledgeBase& first,
                                                                        const KnowledgeBase& second,
                                                                        const BlockCollection& blocks) {
  std::vector<std::vector<std::size_t>> name_blocks_of(first.size());
  for (std::size_t b = 0; b < blocks.name_blocks.size(); ++b) {
    for (auto i : blocks.name_blocks[b].first) name_blocks_of[i].push_back(b);
  }
  const TokenBlockIndex index(first, second, blocks.token_blocks);
  std::vector<std::pair<EntityIndex, EntityIndex>> out;
  std::vector<EntityIndex> row;
  for (EntityIndex i = 0; i < first.size(); ++i) {
    row.clear();
    for (auto b : name_blocks_of[i]) {
      const auto& s = blocks.name_blocks[b].second;
      row.insert(row.end(), s.begin(), s.end());
    }
    for (auto t : first.tokens(i)) {
      const auto b = index.block_of(Side::kFirst, t);
      if (b == TokenBlockIndex::kNone) continue;
      const auto& s = index.members(static_cast<std::size_t>(b), Side::kSecond);
      row.insert(row.end(), s.begin(), s.end());
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (auto j : row) out.emplace_back(i, j);
  }
  return out;
}

/// Greedy one-to-one assignment: pairs by descending score (ties by
/// ascending (first, second)), each accepted when both sides are still free
/// and its score is at least `threshold`.
inline std::vector<ScoredPair> unique_mapping_clustering(std::vector<ScoredPair> pairs, double threshold) {
  std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  EntityIndex max_first = 0, max_second = 0;
  for (const auto& p : pairs) {
    max_first = std::max(max_first, p.first);
    max_second = std::max(max_second, p.second);
  }
  std::vector<bool> used_first(pairs.empty() ? 0 : max_first + 1u, false);
  std::vector<bool> used_second(pairs.empty() ? 0 : max_second + 1u, false);
  std::vector<ScoredPair> out;
  for (const auto& p : pairs) {
    if (p.score < threshold) break;
    if (used_first[p.first] || used_second[p.second]) continue;
    used_first[p.first] = true;
    used_second[p.second] = true;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid search

struct BslResult {
  BslConfig config;
  Metrics metrics;
};

struct BslGridResult {
  std::vector<BslResult> results;  // bsl_grid() order
  std::size_t best = 0;
  std::size_t candidates = 0;

  const BslResult& best_result() const { return results[best]; }
};

/// Scores one variant and evaluates it at every threshold. UMC at threshold
/// t accepts exactly the prefix of the threshold-free greedy pass whose
/// scores are >= t, so one pass serves all thresholds.
inline std::vector<BslResult> evaluate_variant(const ProfileSet& profiles, const BslVariant& variant,
                                               const std::vector<std::pair<EntityIndex, EntityIndex>>& candidates,
                                               const ResolvedTruth& truth) {
  variant.validate();
  std::vector<ScoredPair> scored;
  scored.reserve(candidates.size());
  for (const auto& [i, j] : candidates) {
    scored.push_back({i, j, pair_similarity(profiles.first[i], profiles.second[j], variant.similarity)});
  }
  const auto accepted = unique_mapping_clustering(std::move(scored), 0.0);

  std::vector<BslResult> out;
  for (double t : bsl_thresholds()) {
    std::size_t predicted = 0, tp = 0;
    for (const auto& p : accepted) {
      if (p.score < t) break;
      ++predicted;
      if (truth.contains(p.first, p.second)) ++tp;
    }
    out.push_back({{variant, t}, compute_metrics(tp, predicted, truth.size())});
  }
  return out;
}

inline BslGridResult bsl_grid_search(const KnowledgeBase& first, const KnowledgeBase& second,
                                     const BlockCollection& blocks, const ResolvedTruth& truth, WorkerPool& pool) {
  BslGridResult grid;
  const auto candidates = bsl_candidates(first, second, blocks);
  grid.candidates = candidates.size();
  const auto variants = bsl_variants();

  std::vector<ProfileSet> profiles(6);
  std::vector<std::function<void()>> build;
  for (int n = 1; n <= 3; ++n) {
    for (auto w : {Weighting::kTF, Weighting::kTFIDF}) {
      const std::size_t slot = static_cast<std::size_t>((n - 1) * 2 + (w == Weighting::kTFIDF ? 1 : 0));
      build.push_back([&, n, w, slot] { profiles[slot] = build_profiles(first, second, n, w); });
    }
  }
  pool.run_all(build);

  std::vector<std::vector<BslResult>> per_variant(variants.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    tasks.push_back([&, v] {
      const auto& var = variants[v];
      const std::size_t slot =
          static_cast<std::size_t>((var.ngram - 1) * 2 + (var.weighting == Weighting::kTFIDF ? 1 : 0));
      per_variant[v] = evaluate_variant(profiles[slot], var, candidates, truth);
    });
  }
  pool.run_all(tasks);

  for (auto& rows : per_variant) {
    for (auto& r : rows) grid.results.push_back(std::move(r));
  }
  for (std::size_t i = 1; i < grid.results.size(); ++i) {
    if (grid.results[i].metrics.f1 > grid.results[grid.best].metrics.f1) grid.best = i;
  }
  return grid;
}

}  // namespace kbmatch
