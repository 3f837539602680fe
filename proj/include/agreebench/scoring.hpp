#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "agreebench/tokenizer.hpp"

namespace agreebench {

// T x V row-major matrix of unnormalized scores.
class LogitMatrix {
 public:
  LogitMatrix() = default;
  LogitMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  LogitMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t v) { return values_[i * cols_ + v]; }
  double operator()(std::size_t i, std::size_t v) const {
    return values_[i * cols_ + v];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct SentenceScore {
  std::size_t num_tokens = 0;
  double mean_nll = 0.0;
  double sum_nll = 0.0;

  static SentenceScore from_sum(std::size_t num_tokens, double sum_nll);
  static SentenceScore from_mean(std::size_t num_tokens, double mean_nll);
  friend bool operator==(const SentenceScore&, const SentenceScore&) = default;
};

// Mean per-position negative log-softmax of the target ids, in nats.
// Throws ScoringError on a dimension mismatch, an out-of-range target or a
// non-finite logit.
SentenceScore cross_entropy(const LogitMatrix& logits,
                            const std::vector<std::uint32_t>& targets);
SentenceScore cross_entropy(const LogitMatrix& logits,
                            const TokenSequence& targets);

struct Capabilities {
  bool unmasked_scoring = true;
  bool masked_candidates = false;
};

// Half-open span in code points.
using CharSpan = std::pair<std::size_t, std::size_t>;

struct MaskedResult {
  // nullopt marks a candidate that is not a single piece.
  std::vector<std::optional<double>> logprobs;
  std::vector<std::size_t> num_subwords;
};

// score() and masked() may be called from up to concurrency_limit() threads.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual std::string name() const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual std::size_t concurrency_limit() const;
  virtual Capabilities capabilities() const { return {}; }

  virtual SentenceScore score(std::string_view text) const = 0;
  virtual MaskedResult masked(std::string_view text, CharSpan span,
                              const std::vector<std::string>& candidates) const;
};

SentenceScore score_sentence(const ScorerBackend& backend, std::string_view text);

// Checks the capability and the span before delegating.
MaskedResult masked_candidates(const ScorerBackend& backend,
                               std::string_view text, CharSpan span,
                               const std::vector<std::string>& candidates);

// `text` with the code points in `span` replaced by `fill`.
std::string splice(std::string_view text, CharSpan span, std::string_view fill);

// 0 nats per token for members of `grammatical`, 1 for anything else.
std::unique_ptr<ScorerBackend> make_oracle_backend(
    std::unordered_set<std::string> grammatical);

// ln V per token for every sentence.
std::unique_ptr<ScorerBackend> make_uniform_backend(std::size_t vocab_size);

// A per-sentence pseudo-random mean in [0, 10), fixed by the seed and text.
std::unique_ptr<ScorerBackend> make_random_backend(std::uint64_t seed);

// Add-k smoothed word n-gram model over whitespace tokens, with <s> padding,
// a </s> event and an <unk> bucket. Throws ScoringError on an empty corpus,
// order outside {2, 3} or k <= 0.
std::unique_ptr<ScorerBackend> train_ngram(
    const std::vector<std::vector<std::string>>& corpus, int order, double k);

}  // namespace agreebench
