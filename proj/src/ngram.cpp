#include <cmath>
#include <unordered_map>

#include "agreebench/error.hpp"
#include "agreebench/scoring.hpp"

namespace agreebench {

namespace {

constexpr int kIdBits = 21;

class NgramBackend final : public ScorerBackend {
 public:
  NgramBackend(const std::vector<std::vector<std::string>>& corpus, int order,
               double k)
      : order_(order), k_(k) {
    if (corpus.empty()) throw ScoringError("n-gram training corpus is empty");
    if (order != 2 && order != 3)
      throw ScoringError("n-gram order must be 2 or 3, got " +
                         std::to_string(order));
    if (!(k > 0.0) || !std::isfinite(k))
      throw ScoringError("smoothing constant must be positive");

    for (const auto& sentence : corpus)
      for (const auto& w : sentence) ids_.emplace(w, static_cast<std::uint32_t>(ids_.size()));
    end_ = static_cast<std::uint32_t>(ids_.size());
    unk_ = end_ + 1;
    bos_ = end_ + 2;
    vocab_ = ids_.size() + 2;
    if (bos_ >= (1u << kIdBits)) throw ScoringError("n-gram vocabulary too large");

    for (const auto& sentence : corpus) {
      auto seq = encode(sentence);
      for (std::size_t i = order_ - 1; i < seq.size(); ++i) {
        std::uint64_t ctx = context(seq, i);
        ++context_counts_[ctx];
        ++event_counts_[(ctx << kIdBits) | seq[i]];
      }
    }
  }

  std::string name() const override {
    return order_ == 2 ? "bigram" : "trigram";
  }
  std::size_t vocab_size() const override { return vocab_; }
  Capabilities capabilities() const override { return {true, true}; }

  SentenceScore score(std::string_view text) const override {
    auto words = split_whitespace(text);
    if (words.empty()) throw ScoringError("cannot score an empty sentence");
    return SentenceScore::from_sum(words.size() + 1, -logprob(words));
  }

  MaskedResult masked(std::string_view text, CharSpan span,
                      const std::vector<std::string>& candidates) const override {
    MaskedResult r;
    std::vector<double> joint;
    double max = -INFINITY;
    for (const auto& c : candidates) {
      auto pieces = split_whitespace(c);
      r.num_subwords.push_back(pieces.size());
      if (pieces.size() != 1) {
        joint.push_back(NAN);
        continue;
      }
      double lp = logprob(split_whitespace(splice(text, span, c)));
      joint.push_back(lp);
      max = std::max(max, lp);
    }
    double z = 0.0;
    for (double lp : joint)
      if (!std::isnan(lp)) z += std::exp(lp - max);
    for (double lp : joint) {
      if (std::isnan(lp))
        r.logprobs.push_back(std::nullopt);
      else
        r.logprobs.push_back(lp - max - std::log(z));
    }
    return r;
  }

 private:
  std::vector<std::uint32_t> encode(const std::vector<std::string>& words) const {
    std::vector<std::uint32_t> seq(order_ - 1, bos_);
    for (const auto& w : words) {
      auto it = ids_.find(w);
      seq.push_back(it == ids_.end() ? unk_ : it->second);
    }
    seq.push_back(end_);
    return seq;
  }

  std::uint64_t context(const std::vector<std::uint32_t>& seq,
                        std::size_t i) const {
    std::uint64_t ctx = 0;
    for (std::size_t j = i - (order_ - 1); j < i; ++j)
      ctx = (ctx << kIdBits) | seq[j];
    return ctx;
  }

  double logprob(const std::vector<std::string>& words) const {
    auto seq = encode(words);
    double lp = 0.0;
    for (std::size_t i = order_ - 1; i < seq.size(); ++i) {
      std::uint64_t ctx = context(seq, i);
      auto c = context_counts_.find(ctx);
      auto e = event_counts_.find((ctx << kIdBits) | seq[i]);
      double num = (e == event_counts_.end() ? 0.0 : e->second) + k_;
      double den = (c == context_counts_.end() ? 0.0 : c->second) +
                   k_ * static_cast<double>(vocab_);
      lp += std::log(num / den);
    }
    return lp;
  }

  std::size_t order_;
  double k_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::uint32_t end_ = 0, unk_ = 0, bos_ = 0;
  std::size_t vocab_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> context_counts_;
  std::unordered_map<std::uint64_t, std::size_t> event_counts_;
};

}  // namespace

std::unique_ptr<ScorerBackend> train_ngram(
    const std::vector<std::vector<std::string>>& corpus, int order, double k) {
  return std::make_unique<NgramBackend>(corpus, order, k);
}

}  // namespace agreebench
