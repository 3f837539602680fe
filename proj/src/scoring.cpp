#include "agreebench/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "agreebench/error.hpp"

namespace agreebench {

LogitMatrix::LogitMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols)
    throw ScoringError("logit matrix has " + std::to_string(values_.size()) +
                       " values, expected " + std::to_string(rows * cols));
}

SentenceScore SentenceScore::from_sum(std::size_t num_tokens, double sum_nll) {
  if (num_tokens == 0) throw ScoringError("score over zero tokens");
  return {num_tokens, sum_nll / static_cast<double>(num_tokens), sum_nll};
}

SentenceScore SentenceScore::from_mean(std::size_t num_tokens, double mean_nll) {
  if (num_tokens == 0) throw ScoringError("score over zero tokens");
  return {num_tokens, mean_nll, mean_nll * static_cast<double>(num_tokens)};
}

SentenceScore cross_entropy(const LogitMatrix& logits,
                            const std::vector<std::uint32_t>& targets) {
  if (logits.rows() != targets.size())
    throw ScoringError("logit matrix has " + std::to_string(logits.rows()) +
                       " rows for " + std::to_string(targets.size()) +
                       " targets");
  if (targets.empty()) throw ScoringError("cross entropy of an empty sequence");
  if (logits.cols() == 0) throw ScoringError("logit matrix has no columns");

  double sum = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (targets[i] >= logits.cols())
      throw ScoringError("target id " + std::to_string(targets[i]) +
                         " outside vocabulary of " +
                         std::to_string(logits.cols()));
    double max = -INFINITY;
    for (std::size_t v = 0; v < logits.cols(); ++v) {
      double x = logits(i, v);
      if (!std::isfinite(x))
        throw ScoringError("non-finite logit at (" + std::to_string(i) + ", " +
                           std::to_string(v) + ")");
      max = std::max(max, x);
    }
    double acc = 0.0;
    for (std::size_t v = 0; v < logits.cols(); ++v)
      acc += std::exp(logits(i, v) - max);
    sum += max + std::log(acc) - logits(i, targets[i]);
  }
  return SentenceScore::from_sum(targets.size(), sum);
}

SentenceScore cross_entropy(const LogitMatrix& logits,
                            const TokenSequence& targets) {
  return cross_entropy(logits, targets.ids);
}

std::size_t ScorerBackend::concurrency_limit() const {
  return std::max(1u, std::thread::hardware_concurrency());
}

MaskedResult ScorerBackend::masked(std::string_view, CharSpan,
                                   const std::vector<std::string>&) const {
  throw ScoringError(name() + " does not support masked scoring");
}

SentenceScore score_sentence(const ScorerBackend& backend,
                             std::string_view text) {
  if (!backend.capabilities().unmasked_scoring)
    throw ScoringError(backend.name() + " does not support sentence scoring");
  return backend.score(text);
}

std::string splice(std::string_view text, CharSpan span, std::string_view fill) {
  auto bounds = utf8_boundaries(text);
  std::size_t chars = bounds.size() - 1;
  if (span.first > span.second || span.second > chars)
    throw ScoringError("span [" + std::to_string(span.first) + ", " +
                       std::to_string(span.second) + ") outside text of " +
                       std::to_string(chars) + " characters");
  std::string out(text.substr(0, bounds[span.first]));
  out += fill;
  out += text.substr(bounds[span.second]);
  return out;
}

MaskedResult masked_candidates(const ScorerBackend& backend,
                               std::string_view text, CharSpan span,
                               const std::vector<std::string>& candidates) {
  if (!backend.capabilities().masked_candidates)
    throw ScoringError(backend.name() + " does not support masked scoring");
  splice(text, span, "");
  auto result = backend.masked(text, span, candidates);
  if (result.logprobs.size() != candidates.size())
    throw ScoringError(backend.name() + " returned " +
                       std::to_string(result.logprobs.size()) +
                       " log-probabilities for " +
                       std::to_string(candidates.size()) + " candidates");
  return result;
}

namespace {

std::size_t count_words(std::string_view text) {
  std::size_t n = split_whitespace(text).size();
  if (n == 0) throw ScoringError("cannot score an empty sentence");
  return n;
}

bool single_word(std::string_view candidate) {
  return split_whitespace(candidate).size() == 1;
}

class OracleBackend final : public ScorerBackend {
 public:
  explicit OracleBackend(std::unordered_set<std::string> grammatical)
      : grammatical_(std::move(grammatical)) {
    std::unordered_set<std::string> forms;
    for (const auto& s : grammatical_)
      for (auto& w : split_whitespace(s)) forms.insert(std::move(w));
    vocab_size_ = forms.size();
  }

  std::string name() const override { return "oracle"; }
  std::size_t vocab_size() const override { return vocab_size_; }
  Capabilities capabilities() const override { return {true, true}; }

  SentenceScore score(std::string_view text) const override {
    double mean = grammatical_.count(std::string(text)) ? 0.0 : 1.0;
    return SentenceScore::from_mean(count_words(text), mean);
  }

  MaskedResult masked(std::string_view text, CharSpan span,
                      const std::vector<std::string>& candidates) const override {
    MaskedResult r;
    for (const auto& c : candidates) {
      r.num_subwords.push_back(split_whitespace(c).size());
      if (!single_word(c)) {
        r.logprobs.push_back(std::nullopt);
        continue;
      }
      bool hit = grammatical_.count(splice(text, span, c)) > 0;
      r.logprobs.push_back(hit ? 0.0 : -1.0);
    }
    return r;
  }

 private:
  std::unordered_set<std::string> grammatical_;
  std::size_t vocab_size_ = 0;
};

class UniformBackend final : public ScorerBackend {
 public:
  explicit UniformBackend(std::size_t v) : v_(v) {
    if (v == 0) throw ScoringError("uniform backend needs a non-empty vocabulary");
  }

  std::string name() const override { return "uniform"; }
  std::size_t vocab_size() const override { return v_; }
  Capabilities capabilities() const override { return {true, true}; }

  SentenceScore score(std::string_view text) const override {
    return SentenceScore::from_mean(count_words(text),
                                    std::log(static_cast<double>(v_)));
  }

  MaskedResult masked(std::string_view, CharSpan,
                      const std::vector<std::string>& candidates) const override {
    MaskedResult r;
    for (const auto& c : candidates) {
      r.num_subwords.push_back(split_whitespace(c).size());
      if (single_word(c))
        r.logprobs.push_back(-std::log(static_cast<double>(v_)));
      else
        r.logprobs.push_back(std::nullopt);
    }
    return r;
  }

 private:
  std::size_t v_;
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class RandomBackend final : public ScorerBackend {
 public:
  explicit RandomBackend(std::uint64_t seed) : seed_(seed) {}

  std::string name() const override { return "random"; }
  std::size_t vocab_size() const override { return 0; }
  Capabilities capabilities() const override { return {true, true}; }

  SentenceScore score(std::string_view text) const override {
    return SentenceScore::from_mean(count_words(text), 10.0 * draw(text));
  }

  MaskedResult masked(std::string_view text, CharSpan span,
                      const std::vector<std::string>& candidates) const override {
    MaskedResult r;
    for (const auto& c : candidates) {
      r.num_subwords.push_back(split_whitespace(c).size());
      if (single_word(c))
        r.logprobs.push_back(-10.0 * draw(splice(text, span, c)));
      else
        r.logprobs.push_back(std::nullopt);
    }
    return r;
  }

 private:
  double draw(std::string_view text) const {
    std::mt19937_64 rng(seed_ ^ fnv1a(text));
    return static_cast<double>(rng() >> 11) * 0x1p-53;
  }

  std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<ScorerBackend> make_oracle_backend(
    std::unordered_set<std::string> grammatical) {
  return std::make_unique<OracleBackend>(std::move(grammatical));
}

std::unique_ptr<ScorerBackend> make_uniform_backend(std::size_t vocab_size) {
  return std::make_unique<UniformBackend>(vocab_size);
}

std::unique_ptr<ScorerBackend> make_random_backend(std::uint64_t seed) {
  return std::make_unique<RandomBackend>(seed);
}

}  // namespace agreebench
