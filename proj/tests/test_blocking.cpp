#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace kbmatch;
using kbtest::parse;

namespace {

const Block* find_block(const std::vector<Block>& blocks, const std::string& key) {
  for (const auto& b : blocks) {
    if (b.key == key) return &b;
  }
  return nullptr;
}

Block make_block(std::string key, std::size_t n1, std::size_t n2) {
  Block b{std::move(key), {}, {}};
  for (EntityIndex i = 0; i < n1; ++i) b.first.push_back(i);
  for (EntityIndex j = 0; j < n2; ++j) b.second.push_back(j);
  return b;
}

}  // namespace

TEST(TokenBlocking, TokenInOneKbOnlyMakesNoBlock) {
  const auto a = parse("x\tn\t\"alpha beta\"\n", Side::kFirst);
  const auto b = parse("y\tn\t\"beta gamma\"\n", Side::kSecond);
  const auto blocks = token_blocking(a, b);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].key, "beta");
}

TEST(TokenBlocking, SubBlockSizesEqualEntityFrequencies) {
  std::mt19937_64 rng(1);
  const auto a = kbtest::random_kb(rng, Side::kFirst, {.entities = 20});
  const auto b = kbtest::random_kb(rng, Side::kSecond, {.entities = 20});
  const auto ea = kbtest::oracle_ef(a), eb = kbtest::oracle_ef(b);
  for (const auto& blk : token_blocking(a, b)) {
    EXPECT_EQ(blk.first.size(), ea.at(blk.key));
    EXPECT_EQ(blk.second.size(), eb.at(blk.key));
    EXPECT_GE(blk.first.size(), 1u);
    EXPECT_GE(blk.second.size(), 1u);
  }
}

TEST(TokenBlocking, EverySharingPairCoOccurs) {
  std::mt19937_64 rng(2);
  for (int round = 0; round < 10; ++round) {
    const auto a = kbtest::random_kb(rng, Side::kFirst, {.entities = 12});
    const auto b = kbtest::random_kb(rng, Side::kSecond, {.entities = 12});
    const auto blocks = token_blocking(a, b);
    for (EntityIndex i = 0; i < a.size(); ++i) {
      const auto ti = kbtest::oracle_tokens(a, i);
      for (EntityIndex j = 0; j < b.size(); ++j) {
        for (const auto& t : kbtest::oracle_tokens(b, j)) {
          if (!ti.count(t)) continue;
          const auto* blk = find_block(blocks, t);
          ASSERT_NE(blk, nullptr);
          EXPECT_TRUE(std::binary_search(blk->first.begin(), blk->first.end(), i));
          EXPECT_TRUE(std::binary_search(blk->second.begin(), blk->second.end(), j));
        }
      }
    }
  }
}

TEST(NameBlocking, RunningExampleSharedName) {
  const auto kb1 = kbtest::sample("kb1.tsv", Side::kFirst);
  const auto kb2 = kbtest::sample("kb2.tsv", Side::kSecond);
  const auto blocks = name_blocking(kb1, kb2, top_k_name_attributes(kb1, 2), top_k_name_attributes(kb2, 2));
  const auto* b = find_block(blocks, "J. Lake");
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->first, std::vector<EntityIndex>{*kb1.find("JohnLakeA")});
  EXPECT_EQ(b->second, std::vector<EntityIndex>{*kb2.find("JonnyLake")});
  EXPECT_EQ(b->comparisons(), 1u);
}

TEST(NameBlocking, NoSharedNames) {
  const auto a = parse("x\tname\t\"Alpha\"\n", Side::kFirst);
  const auto b = parse("y\tname\t\"alpha\"\n", Side::kSecond);
  EXPECT_TRUE(name_blocking(a, b, top_k_name_attributes(a, 2), top_k_name_attributes(b, 2)).empty());
}

TEST(Purge, FullBudgetKeepsEverything) {
  std::vector<Block> blocks = {make_block("a", 1, 2), make_block("b", 2, 2)};
  const auto r = purge_blocks(blocks, 1.0, 10, 10);
  EXPECT_EQ(r.retained.size(), 2u);
  EXPECT_TRUE(r.purged_keys.empty());
}

TEST(Purge, GiantBlockGoesFirst) {
  std::vector<Block> blocks = {make_block("small", 1, 1), make_block("giant", 10, 10), make_block("mid", 2, 3)};
  // budget 0.1 * 10 * 10 = 10 comparisons; the giant block alone exceeds it
  const auto r = purge_blocks(blocks, 0.1, 10, 10);
  EXPECT_EQ(r.purged_keys, std::vector<std::string>{"giant"});
  EXPECT_EQ(total_comparisons(r.retained), 7u);
}

TEST(Purge, TiesBrokenByKey) {
  std::vector<Block> blocks = {make_block("b", 2, 2), make_block("a", 2, 2), make_block("c", 1, 1)};
  const auto r = purge_blocks(blocks, 0.05, 10, 10);  // budget 5
  EXPECT_EQ(r.purged_keys, std::vector<std::string>{"a"});
}

TEST(Purge, InvalidFractionIsAConfigError) {
  EXPECT_THROW(purge_blocks({}, 0.0, 1, 1), ConfigError);
  EXPECT_THROW(purge_blocks({}, 1.5, 1, 1), ConfigError);
  EXPECT_THROW(purge_blocks({}, -0.1, 1, 1), ConfigError);
}

TEST(Purge, RetainedWithinBudgetAndCoverageRecomputed) {
  SyntheticConfig cfg;
  cfg.entities = 800;
  const auto ds = generate_synthetic(cfg);
  const auto truth = resolve(ds.truth, ds.first, ds.second);
  const double fraction = 1e-2;
  const auto blocks = build_blocks(ds.first, ds.second, 2, fraction);
  EXPECT_LE(static_cast<double>(total_comparisons(blocks.token_blocks)),
            fraction * ds.first.size() * ds.second.size());
  EXPECT_FALSE(blocks.purged_keys.empty());

  // oracle coverage: a pair is covered if it shares a retained token or a name block
  std::set<std::string> retained;
  for (const auto& b : blocks.token_blocks) retained.insert(b.key);
  const auto n1 = top_k_name_attributes(ds.first, 2), n2 = top_k_name_attributes(ds.second, 2);
  std::size_t covered = 0;
  for (const auto& [i, j] : truth.pairs) {
    bool hit = false;
    const auto ti = kbtest::oracle_tokens(ds.first, i), tj = kbtest::oracle_tokens(ds.second, j);
    for (const auto& t : ti) hit = hit || (tj.count(t) && retained.count(t));
    for (const auto& x : names(ds.first, i, n1)) {
      for (const auto& y : names(ds.second, j, n2)) hit = hit || x == y;
    }
    covered += hit;
  }
  const auto stats = block_stats(blocks, ds.first, ds.second, truth);
  EXPECT_EQ(stats.covered, covered);
  EXPECT_DOUBLE_EQ(stats.recall, 100.0 * covered / truth.size());
}

TEST(BlockStats, PrecisionAndRecallDefinitions) {
  const auto a = parse("a1\tn\t\"red lion\"\na2\tn\t\"blue whale\"\n", Side::kFirst);
  const auto b = parse("b1\tn\t\"red lion\"\nb2\tn\t\"green whale\"\nb3\tn\t\"lion king\"\n", Side::kSecond);
  GroundTruth t;
  t.add("a1", "b1");
  t.add("a2", "b2");
  const auto truth = resolve(t, a, b);
  const auto blocks = build_blocks(a, b, 1, 1.0);
  const auto s = block_stats(blocks, a, b, truth);
  // name block "red lion" (1x1); token blocks lion (1x2), red (1x1), whale (1x1)
  EXPECT_EQ(s.name_comparisons, 1u);
  EXPECT_EQ(s.token_comparisons, 4u);
  EXPECT_EQ(s.covered, 2u);
  EXPECT_DOUBLE_EQ(s.recall, 100.0);
  EXPECT_DOUBLE_EQ(s.precision, 40.0);
}
