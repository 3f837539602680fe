#include <gtest/gtest.h>

#include "agreebench/stats.hpp"
#include "support.hpp"

using namespace agreebench;

TEST(Stats, SmallCorpus) {
  MinimalPair a, b;
  a.phenomenon = Phenomenon::kSimpleSentence;
  a.grammatical = {"Der", "Autor", "lacht", "."};
  a.ungrammatical = {"Der", "Autor", "lachen", "."};
  b.phenomenon = Phenomenon::kAcrossPp;
  b.grammatical = {"Die", "Kinder", "lachen", ",", "ja", "."};
  b.ungrammatical = {"Die", "Kinder", "lacht", ",", "ja", "."};
  auto s = corpus_stats({a, b});
  EXPECT_EQ(s.total_pairs, 2u);
  EXPECT_DOUBLE_EQ(s.mean_tokens, 5.0);
  EXPECT_DOUBLE_EQ(s.mean_tokens_without_punctuation, 3.5);
  EXPECT_EQ(s.word_forms, 7u);
  EXPECT_FALSE(s.lexemes);
  EXPECT_EQ(s.pairs_per_phenomenon.at("across_pp"), 1u);
}

TEST(Stats, Punctuation) {
  EXPECT_TRUE(is_punctuation("."));
  EXPECT_TRUE(is_punctuation(","));
  EXPECT_FALSE(is_punctuation("Ärztin"));
  EXPECT_FALSE(is_punctuation(""));
}

TEST(Stats, ShippedCorpus) {
  const auto& grammars = testing_support::shipped_grammars();
  auto s = corpus_stats(testing_support::shipped_pairs(), &grammars);
  EXPECT_EQ(s.total_pairs, kReferenceSentences);
  EXPECT_EQ(s.pairs_per_phenomenon.size(), 14u);
  EXPECT_EQ(s.min_pairs_per_phenomenon, 69u);
  EXPECT_EQ(s.max_pairs_per_phenomenon, 2160u);
  EXPECT_NEAR(s.mean_pairs_per_phenomenon, 13002.0 / 14.0, 1e-9);
  ASSERT_TRUE(s.lexemes);
  EXPECT_LE(*s.lexemes, s.word_forms);
  auto text = render_stats(s);
  EXPECT_NE(text.find("pairs: 13002 (reference 13002, deviation +0)"), std::string::npos);
  EXPECT_NE(text.find("reference 6.88"), std::string::npos);
}
