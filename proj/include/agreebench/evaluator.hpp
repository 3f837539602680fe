#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agreebench/pairfile.hpp"
#include "agreebench/phenomenon.hpp"
#include "agreebench/scoring.hpp"
#include "agreebench/tokenizer.hpp"

namespace agreebench {

enum class Verdict { kCorrect, kIncorrect, kTie, kDiscarded };

std::string_view to_string(Verdict v);

enum class GateMode { kWhitespace, kSubword, kBackend };
enum class ScoreBasis { kMean, kSum };
enum class ScoringMode { kSentence, kMasked };

std::string_view to_string(GateMode m);
std::string_view to_string(ScoreBasis b);
std::string_view to_string(ScoringMode m);
std::optional<GateMode> parse_gate_mode(std::string_view s);
std::optional<ScoreBasis> parse_score_basis(std::string_view s);
std::optional<ScoringMode> parse_scoring_mode(std::string_view s);

struct PairDecision {
  std::string pair_id;
  Phenomenon phenomenon = Phenomenon::kSimpleSentence;
  std::string condition;
  Verdict verdict = Verdict::kDiscarded;
  std::optional<SentenceScore> score_grammatical;
  std::optional<SentenceScore> score_ungrammatical;
  GateResult gate;
};

// Discarded when the gate says so; otherwise correct iff the grammatical
// score is strictly lower, tie iff exactly equal. Throws ScoringError when a
// kept pair lacks a score.
Verdict judge_pair(const std::optional<SentenceScore>& grammatical,
                   const std::optional<SentenceScore>& ungrammatical,
                   const GateResult& gate, ScoreBasis basis = ScoreBasis::kMean);

struct CategoryResult {
  Phenomenon phenomenon = Phenomenon::kSimpleSentence;
  std::optional<std::string> condition;
  std::size_t n_total = 0;
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  std::size_t n_tie = 0;
  std::size_t n_discarded = 0;

  void add(Verdict v);
  // Correct over non-discarded pairs; nullopt when that is zero.
  std::optional<double> accuracy() const;

  friend bool operator==(const CategoryResult&, const CategoryResult&) = default;
};

struct EvaluationReport {
  std::string backend;
  std::string timestamp;
  std::map<std::string, std::string> config;
  // Always fourteen rows, in table order.
  std::vector<CategoryResult> coarse;
  // Ordered by phenomenon, then condition rank.
  std::vector<CategoryResult> fine;
  bool incomplete = false;
  std::string error;

  const CategoryResult& coarse_row(Phenomenon p) const;
  std::vector<CategoryResult> fine_rows(Phenomenon p) const;
  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// Pure fold over the decisions; order does not matter.
EvaluationReport aggregate(const std::vector<PairDecision>& decisions);

struct EvaluationConfig {
  GateMode gate = GateMode::kWhitespace;
  // Required for GateMode::kSubword.
  const SubwordVocab* vocab = nullptr;
  ScoreBasis basis = ScoreBasis::kMean;
  ScoringMode mode = ScoringMode::kSentence;
  // Cap on concurrent requests; 0 means the backend's limit.
  std::size_t jobs = 0;
  // One JSON record per pair, in pair order.
  std::ostream* audit = nullptr;
  // Current UTC time when empty.
  std::string timestamp;
  // Extra entries copied into the report config.
  std::map<std::string, std::string> echo;
};

// Code-point span of token `index` in the single-space join of `tokens`.
CharSpan token_span(const std::vector<std::string>& tokens, std::size_t index);

PairDecision decide(const MinimalPair& pair, const ScorerBackend& backend,
                    const EvaluationConfig& config);

// Scores every pair. A TransportError stops the run; the report then covers
// the pairs decided so far and is marked incomplete.
EvaluationReport evaluate_pairs(const std::vector<MinimalPair>& pairs,
                                const ScorerBackend& backend,
                                const EvaluationConfig& config);
EvaluationReport evaluate_dataset(const PairFile& file,
                                  const ScorerBackend& backend,
                                  const EvaluationConfig& config);

std::string audit_record(const PairDecision& d);

std::string utc_timestamp();

}  // namespace agreebench
