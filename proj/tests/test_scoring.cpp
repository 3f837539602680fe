#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "agreebench/error.hpp"
#include "agreebench/scoring.hpp"

using namespace agreebench;

namespace {

// Softmax probabilities computed directly, then -log of the target entry.
double naive_mean_nll(const std::vector<std::vector<double>>& rows,
                      const std::vector<std::uint32_t>& targets) {
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double z = 0.0;
    for (double x : rows[i]) z += std::exp(x);
    total += -std::log(std::exp(rows[i][targets[i]]) / z);
  }
  return total / static_cast<double>(rows.size());
}

LogitMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  LogitMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t v = 0; v < rows[i].size(); ++v) m(i, v) = rows[i][v];
  return m;
}

// Scores nothing; reports candidate piece counts under a sub-word vocabulary.
class PieceCounting final : public ScorerBackend {
 public:
  explicit PieceCounting(const SubwordVocab& v) : v_(v) {}
  std::string name() const override { return "pieces"; }
  std::size_t vocab_size() const override { return v_.size(); }
  Capabilities capabilities() const override { return {false, true}; }
  SentenceScore score(std::string_view) const override { return {}; }
  MaskedResult masked(std::string_view, CharSpan,
                      const std::vector<std::string>& candidates) const override {
    MaskedResult r;
    for (const auto& c : candidates) {
      auto n = wordpiece(c, v_).size();
      r.num_subwords.push_back(n);
      r.logprobs.push_back(n == 1 ? std::optional<double>(-1.0 - c.size())
                                  : std::nullopt);
    }
    return r;
  }

 private:
  const SubwordVocab& v_;
};

}  // namespace

TEST(CrossEntropy, UniformTwoWay) {
  auto s = cross_entropy(LogitMatrix(1, 2, {0.0, 0.0}), std::vector<std::uint32_t>{0});
  EXPECT_NEAR(s.mean_nll, std::log(2.0), 1e-12);
  EXPECT_NEAR(s.mean_nll, 0.693147, 1e-6);
  EXPECT_EQ(s.num_tokens, 1u);
}

TEST(CrossEntropy, LargeLogitsDoNotOverflow) {
  auto s = cross_entropy(LogitMatrix(1, 2, {1000.0, 0.0}), std::vector<std::uint32_t>{0});
  EXPECT_TRUE(std::isfinite(s.mean_nll));
  EXPECT_NEAR(s.mean_nll, 0.0, 1e-12);
  auto t = cross_entropy(LogitMatrix(1, 2, {1000.0, 0.0}), std::vector<std::uint32_t>{1});
  EXPECT_NEAR(t.mean_nll, 1000.0, 1e-9);
}

TEST(CrossEntropy, MatchesNaiveSoftmax) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> dim_t(1, 8), dim_v(1, 20);
  std::normal_distribution<double> logit(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    int T = dim_t(rng), V = dim_v(rng);
    std::vector<std::vector<double>> rows(T, std::vector<double>(V));
    std::vector<std::uint32_t> targets(T);
    for (int i = 0; i < T; ++i) {
      for (int v = 0; v < V; ++v) rows[i][v] = logit(rng);
      targets[i] = static_cast<std::uint32_t>(rng() % V);
    }
    auto s = cross_entropy(to_matrix(rows), targets);
    double want = naive_mean_nll(rows, targets);
    double scale = std::max(1.0, std::abs(want));
    ASSERT_LE(std::abs(s.mean_nll - want), 1e-9 * scale) << "trial " << trial;
    ASSERT_NEAR(s.sum_nll, s.mean_nll * T, 1e-9 * std::max(1.0, s.sum_nll));
  }
}

TEST(CrossEntropy, ShiftInvariantPerRow) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> logit(0.0, 2.0), shift(0.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t T = 1 + rng() % 8, V = 1 + rng() % 20;
    LogitMatrix a(T, V), b(T, V);
    std::vector<std::uint32_t> targets(T);
    for (std::size_t i = 0; i < T; ++i) {
      double c = shift(rng);
      for (std::size_t v = 0; v < V; ++v) {
        a(i, v) = logit(rng);
        b(i, v) = a(i, v) + c;
      }
      targets[i] = static_cast<std::uint32_t>(rng() % V);
    }
    double x = cross_entropy(a, targets).mean_nll;
    double y = cross_entropy(b, targets).mean_nll;
    ASSERT_LE(std::abs(x - y), 1e-9 * std::max(1.0, std::abs(x)));
  }
}

TEST(CrossEntropy, NonNegative) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> logit(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    LogitMatrix m(3, 7);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t v = 0; v < 7; ++v) m(i, v) = logit(rng);
    ASSERT_GE(cross_entropy(m, std::vector<std::uint32_t>{0, 3, 6}).mean_nll, 0.0);
  }
}

TEST(CrossEntropy, Errors) {
  LogitMatrix m(2, 3, 0.0);
  EXPECT_THROW(cross_entropy(m, std::vector<std::uint32_t>{0}), ScoringError);
  EXPECT_THROW(cross_entropy(m, std::vector<std::uint32_t>{0, 3}), ScoringError);
  m(1, 1) = NAN;
  EXPECT_THROW(cross_entropy(m, std::vector<std::uint32_t>{0, 0}), ScoringError);
  m(1, 1) = INFINITY;
  EXPECT_THROW(cross_entropy(m, std::vector<std::uint32_t>{0, 0}), ScoringError);
  EXPECT_THROW(LogitMatrix(2, 2, std::vector<double>{1.0}), ScoringError);
}

TEST(CrossEntropy, TakesTokenSequences) {
  TokenSequence t;
  t.tokens = {"a", "b"};
  t.ids = {1, 0};
  auto s = cross_entropy(LogitMatrix(2, 2, {0.0, 0.0, 0.0, 0.0}), t);
  EXPECT_NEAR(s.mean_nll, std::log(2.0), 1e-12);
  EXPECT_EQ(s.num_tokens, 2u);
}

TEST(Backends, UniformIsLogV) {
  auto b = make_uniform_backend(171);
  auto s = score_sentence(*b, "Der Autor lacht .");
  EXPECT_NEAR(s.mean_nll, 5.141664, 1e-6);
  EXPECT_NEAR(s.mean_nll, std::log(171.0), 1e-15);
  EXPECT_EQ(s.num_tokens, 4u);
  EXPECT_EQ(score_sentence(*b, "Die Kinder schlafen tief ."), 
            SentenceScore::from_mean(5, std::log(171.0)));
}

TEST(Backends, OracleMembership) {
  auto b = make_oracle_backend({"Der Autor lacht ."});
  EXPECT_EQ(score_sentence(*b, "Der Autor lacht .").mean_nll, 0.0);
  EXPECT_EQ(score_sentence(*b, "Der Autor lachen .").mean_nll, 1.0);
  EXPECT_EQ(b->vocab_size(), 4u);
}

TEST(Backends, RandomIsDeterministicPerSeedAndText) {
  auto a = make_random_backend(42), b = make_random_backend(42), c = make_random_backend(43);
  auto x = score_sentence(*a, "Das Kind trinkt .");
  EXPECT_EQ(x, score_sentence(*b, "Das Kind trinkt ."));
  EXPECT_NE(x, score_sentence(*c, "Das Kind trinkt ."));
  EXPECT_GE(x.mean_nll, 0.0);
  EXPECT_LT(x.mean_nll, 10.0);
}

TEST(Backends, SumEqualsMeanTimesTokens) {
  auto b = make_random_backend(5);
  for (std::string s : {"a", "a b", "a b c d e f g"}) {
    auto r = score_sentence(*b, s);
    EXPECT_NEAR(r.sum_nll, r.mean_nll * r.num_tokens, 1e-9 * std::max(1.0, r.sum_nll));
  }
}

TEST(Backends, EmptySentenceIsAnError) {
  EXPECT_THROW(score_sentence(*make_uniform_backend(3), ""), ScoringError);
}

TEST(Masked, OraclePrefersTheGrammaticalCandidate) {
  auto b = make_oracle_backend({"Der Mann lacht ."});
  std::string text = "Der Mann lacht .";
  auto r = masked_candidates(*b, text, {9, 14}, {"lacht", "lachen"});
  ASSERT_EQ(r.logprobs.size(), 2u);
  ASSERT_TRUE(r.logprobs[0] && r.logprobs[1]);
  EXPECT_GT(*r.logprobs[0], *r.logprobs[1]);
}

TEST(Masked, SingleCandidate) {
  auto b = make_uniform_backend(10);
  auto r = masked_candidates(*b, "Der Mann lacht .", {9, 14}, {"lacht"});
  ASSERT_EQ(r.logprobs.size(), 1u);
  EXPECT_TRUE(r.logprobs[0]);
}

TEST(Masked, MultiPieceCandidateIsSkipped) {
  SubwordVocab v({"[UNK]", "lach", "##en", "lacht", "Der", "Mann", "."});
  PieceCounting b(v);
  auto r = masked_candidates(b, "Der Mann lacht .", {9, 14}, {"lacht", "lachen"});
  EXPECT_TRUE(r.logprobs[0]);
  EXPECT_FALSE(r.logprobs[1]);
  EXPECT_EQ(r.num_subwords, (std::vector<std::size_t>{1, 2}));
}

TEST(Masked, SpanOutsideTextIsAnError) {
  auto b = make_uniform_backend(10);
  EXPECT_THROW(masked_candidates(*b, "kurz", {2, 9}, {"x"}), ScoringError);
  EXPECT_THROW(masked_candidates(*b, "kurz", {3, 2}, {"x"}), ScoringError);
}

TEST(Masked, CapabilityIsChecked) {
  SubwordVocab v({"[UNK]"});
  PieceCounting b(v);
  EXPECT_THROW(score_sentence(b, "a"), ScoringError);
}

TEST(Splice, WorksInCodePoints) {
  EXPECT_EQ(splice("Die Ärztin lacht .", {4, 10}, "Frau"), "Die Frau lacht .");
  EXPECT_EQ(splice("abc", {3, 3}, "d"), "abcd");
}

TEST(Timing, HundredMatricesWellUnderASecond) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> logit(0.0, 3.0);
  auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 100; ++trial) {
    LogitMatrix m(8, 20);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t v = 0; v < 20; ++v) m(i, v) = logit(rng);
    cross_entropy(m, std::vector<std::uint32_t>(8, 3));
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
}
