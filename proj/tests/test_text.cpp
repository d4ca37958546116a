#include <gtest/gtest.h>

#include <cmath>

#include "kbmatch/text.hpp"

using kbmatch::tokenize;
using kbmatch::token_weight;

TEST(Tokenize, SplitsOnPunctuationAndLowercases) {
  EXPECT_EQ(tokenize("J. Lake"), (std::vector<std::string>{"j", "lake"}));
  EXPECT_EQ(tokenize("  Fat-Duck,Bray  "), (std::vector<std::string>{"fat", "duck", "bray"}));
}

TEST(Tokenize, NumbersAndDatesAreStrings) {
  EXPECT_EQ(tokenize("1995-03-12"), (std::vector<std::string>{"1995", "03", "12"}));
  EXPECT_EQ(tokenize("v2.0"), (std::vector<std::string>{"v2", "0"}));
}

TEST(Tokenize, EmptyAndSeparatorsOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" ,.;!? ").empty());
}

TEST(Tokenize, KeepsUtf8WordsWhole) {
  const auto t = tokenize("Caf\xc3\xa9 M\xc3\xbcnchen");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], "caf\xc3\xa9");
  EXPECT_EQ(t[1], "m\xc3\xbcnchen");
}

TEST(Tokenize, Deterministic) { EXPECT_EQ(tokenize("a B c, d"), tokenize("a B c, d")); }

TEST(TokenWeight, UniqueTokenContributesOne) { EXPECT_DOUBLE_EQ(token_weight(1, 1), 1.0); }

TEST(TokenWeight, DecreasesWithFrequency) {
  EXPECT_DOUBLE_EQ(token_weight(2, 2), 1.0 / std::log2(5.0));
  EXPECT_LT(token_weight(3, 1), token_weight(2, 1));
  EXPECT_LT(token_weight(10, 10), token_weight(10, 9));
}
