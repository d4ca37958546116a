#pragma once

// Name blocking, token blocking and block purging.
//
// Only blocks with members in both knowledge bases are kept: clean-clean
// resolution never compares two descriptions of the same KB.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kbmatch/error.hpp"
#include "kbmatch/knowledge_base.hpp"
#include "kbmatch/statistics.hpp"
#include "kbmatch/triples.hpp"

namespace kbmatch {

struct Block {
  std::string key;
  std::vector<EntityIndex> first;   // members from the first KB, ascending
  std::vector<EntityIndex> second;  // members from the second KB, ascending

  std::size_t comparisons() const noexcept { return first.size() * second.size(); }
};

inline std::size_t total_comparisons(std::span<const Block> blocks) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.comparisons();
  return n;
}

struct BlockCollection {
  std::vector<Block> name_blocks;
  std::vector<Block> token_blocks;         // after purging
  std::vector<std::string> purged_keys;    // purged token blocks, ascending
};

/// One block per token that occurs in both knowledge bases. Sub-block sizes
/// equal the token's entity frequency in each KB. Sorted by key.
inline std::vector<Block> token_blocking(const KnowledgeBase& first, const KnowledgeBase& second) {
  std::vector<Block> out;
  TokenId x = 0, y = 0;
  while (x < first.token_count() && y < second.token_count()) {
    const int cmp = first.token(x).compare(second.token(y));
    if (cmp < 0) {
      ++x;
    } else if (cmp > 0) {
      ++y;
    } else {
      auto p1 = first.postings(x);
      auto p2 = second.postings(y);
      out.push_back({first.token(x), {p1.begin(), p1.end()}, {p2.begin(), p2.end()}});
      ++x;
      ++y;
    }
  }
  return out;
}

/// One block per name string found in both knowledge bases, keyed by exact
/// string equality. Sorted by key.
inline std::vector<Block> name_blocking(const KnowledgeBase& first, const KnowledgeBase& second,
                                        const std::vector<AttributeId>& name_attrs_first,
                                        const std::vector<AttributeId>& name_attrs_second) {
  auto collect = [](const KnowledgeBase& kb, const std::vector<AttributeId>& attrs) {
    std::vector<std::pair<std::string, EntityIndex>> postings;
    for (EntityIndex i = 0; i < kb.size(); ++i) {
      for (auto& n : names(kb, i, attrs)) postings.emplace_back(std::move(n), i);
    }
    std::sort(postings.begin(), postings.end());
    return postings;
  };
  const auto a = collect(first, name_attrs_first);
  const auto b = collect(second, name_attrs_second);

  std::vector<Block> out;
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    const int cmp = a[x].first.compare(b[y].first);
    if (cmp < 0) {
      ++x;
    } else if (cmp > 0) {
      ++y;
    } else {
      Block blk;
      blk.key = a[x].first;
      for (; x < a.size() && a[x].first == blk.key; ++x) blk.first.push_back(a[x].second);
      for (; y < b.size() && b[y].first == blk.key; ++y) blk.second.push_back(b[y].second);
      out.push_back(std::move(blk));
    }
  }
  return out;
}

struct PurgeResult {
  std::vector<Block> retained;            // sorted by key
  std::vector<std::string> purged_keys;   // sorted
};

/// Removes the largest token blocks (by comparisons; ties by key) until the
/// retained blocks suggest at most `max_comparisons_fraction` of the
/// |E1| x |E2| brute-force comparisons.
inline PurgeResult purge_blocks(std::vector<Block> blocks, double max_comparisons_fraction,
                                std::size_t first_size, std::size_t second_size) {
  if (!(max_comparisons_fraction > 0.0 && max_comparisons_fraction <= 1.0)) {
    throw ConfigError("purge fraction must be in (0, 1], got " + std::to_string(max_comparisons_fraction));
  }
  const double budget =
      max_comparisons_fraction * static_cast<double>(first_size) * static_cast<double>(second_size);

  std::vector<std::size_t> order(blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ca = blocks[a].comparisons();
    const auto cb = blocks[b].comparisons();
    if (ca != cb) return ca > cb;
    return blocks[a].key < blocks[b].key;
  });

  double total = static_cast<double>(total_comparisons(blocks));
  std::vector<bool> purged(blocks.size(), false);
  for (std::size_t r = 0; r < order.size() && total > budget; ++r) {
    purged[order[r]] = true;
    total -= static_cast<double>(blocks[order[r]].comparisons());
  }

  PurgeResult out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (purged[i]) {
      out.purged_keys.push_back(std::move(blocks[i].key));
    } else {
      out.retained.push_back(std::move(blocks[i]));
    }
  }
  std::sort(out.purged_keys.begin(), out.purged_keys.end());
  return out;
}

/// Maps each token of either KB to its retained token block, if any.
class TokenBlockIndex {
 public:
  static constexpr std::int64_t kNone = -1;

  TokenBlockIndex() = default;

  TokenBlockIndex(const KnowledgeBase& first, const KnowledgeBase& second, std::span<const Block> blocks)
      : blocks_(blocks),
        of_first_(first.token_count(), kNone),
        of_second_(second.token_count(), kNone),
        token_second_(blocks.size(), 0) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      auto t1 = first.find_token(blocks[b].key);
      auto t2 = second.find_token(blocks[b].key);
      if (t1) of_first_[*t1] = static_cast<std::int64_t>(b);
      if (t2) {
        of_second_[*t2] = static_cast<std::int64_t>(b);
        token_second_[b] = *t2;
      }
    }
  }

  std::span<const Block> blocks() const noexcept { return blocks_; }

  std::int64_t block_of(Side side, TokenId t) const {
    return side == Side::kFirst ? of_first_[t] : of_second_[t];
  }

  /// Token id in the second KB of block `b`.
  TokenId second_token(std::size_t b) const { return token_second_[b]; }

  const std::vector<EntityIndex>& members(std::size_t b, Side side) const {
    return side == Side::kFirst ? blocks_[b].first : blocks_[b].second;
  }

 private:
  std::span<const Block> blocks_;
  std::vector<std::int64_t> of_first_;
  std::vector<std::int64_t> of_second_;
  std::vector<TokenId> token_second_;
};

/// Blocks name/token co-occurrence of (first i, second j).
struct CoOccurrence {
  bool name = false;
  bool token = false;
};

/// Answers co-occurrence queries over a BlockCollection.
class CoOccurrenceIndex {
 public:
  CoOccurrenceIndex(const KnowledgeBase& first, const KnowledgeBase& second, const BlockCollection& blocks)
      : first_(&first), tokens_(first, second, blocks.token_blocks), name_blocks_(&blocks.name_blocks),
        name_blocks_of_first_(first.size()) {
    for (std::size_t b = 0; b < blocks.name_blocks.size(); ++b) {
      for (auto i : blocks.name_blocks[b].first) name_blocks_of_first_[i].push_back(b);
    }
  }

  CoOccurrence query(EntityIndex i, EntityIndex j) const {
    CoOccurrence c;
    for (auto b : name_blocks_of_first_[i]) {
      const auto& s = (*name_blocks_)[b].second;
      if (std::binary_search(s.begin(), s.end(), j)) {
        c.name = true;
        break;
      }
    }
    for (auto t : first_->tokens(i)) {
      const auto b = tokens_.block_of(Side::kFirst, t);
      if (b == TokenBlockIndex::kNone) continue;
      const auto& s = tokens_.members(static_cast<std::size_t>(b), Side::kSecond);
      if (std::binary_search(s.begin(), s.end(), j)) {
        c.token = true;
        break;
      }
    }
    return c;
  }

 private:
  const KnowledgeBase* first_;
  TokenBlockIndex tokens_;
  const std::vector<Block>* name_blocks_;
  std::vector<std::vector<std::size_t>> name_blocks_of_first_;
};

/// Name blocks from the top-k name attributes of each KB, plus purged token
/// blocks.
inline BlockCollection build_blocks(const KnowledgeBase& first, const KnowledgeBase& second,
                                    std::size_t name_attributes, double purge_fraction) {
  BlockCollection c;
  c.name_blocks = name_blocking(first, second, top_k_name_attributes(first, name_attributes),
                                top_k_name_attributes(second, name_attributes));
  auto purged = purge_blocks(token_blocking(first, second), purge_fraction, first.size(), second.size());
  c.token_blocks = std::move(purged.retained);
  c.purged_keys = std::move(purged.purged_keys);
  return c;
}

/// Sizes and ground-truth coverage of a block collection. Percentages.
struct BlockStats {
  std::size_t name_blocks = 0;
  std::size_t token_blocks = 0;
  std::size_t purged_blocks = 0;
  std::size_t name_comparisons = 0;
  std::size_t token_comparisons = 0;
  double cartesian = 0.0;
  std::size_t covered = 0;
  std::size_t truth_size = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// A ground-truth pair is covered when it shares at least one retained
/// block. Precision divides by all suggested comparisons (||B_N|| + ||B_T||).
inline BlockStats block_stats(const BlockCollection& blocks, const KnowledgeBase& first,
                              const KnowledgeBase& second, const ResolvedTruth& truth) {
  BlockStats s;
  s.name_blocks = blocks.name_blocks.size();
  s.token_blocks = blocks.token_blocks.size();
  s.purged_blocks = blocks.purged_keys.size();
  s.name_comparisons = total_comparisons(blocks.name_blocks);
  s.token_comparisons = total_comparisons(blocks.token_blocks);
  s.cartesian = static_cast<double>(first.size()) * static_cast<double>(second.size());
  s.truth_size = truth.size();

  if (!blocks.name_blocks.empty() || !blocks.token_blocks.empty()) {
    CoOccurrenceIndex index(first, second, blocks);
    for (const auto& [i, j] : truth.pairs) {
      const auto c = index.query(i, j);
      if (c.name || c.token) ++s.covered;
    }
  }
  const double comparisons = static_cast<double>(s.name_comparisons + s.token_comparisons);
  s.precision = comparisons > 0 ? 100.0 * static_cast<double>(s.covered) / comparisons : 0.0;
  s.recall = s.truth_size > 0 ? 100.0 * static_cast<double>(s.covered) / static_cast<double>(s.truth_size) : 0.0;
  s.f1 = harmonic_mean(s.precision, s.recall);
  return s;
}

}  // namespace kbmatch
