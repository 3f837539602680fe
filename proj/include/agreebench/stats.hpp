#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agreebench/pairgen.hpp"

namespace agreebench {

inline constexpr std::size_t kReferenceSentences = 13002;
inline constexpr double kReferenceMeanTokens = 6.88;
inline constexpr std::size_t kReferenceLexemes = 88;
inline constexpr std::size_t kReferenceWordForms = 171;

struct CorpusStats {
  std::size_t total_pairs = 0;
  std::map<std::string, std::size_t> pairs_per_phenomenon;
  double mean_pairs_per_phenomenon = 0.0;
  std::size_t min_pairs_per_phenomenon = 0;
  std::size_t max_pairs_per_phenomenon = 0;
  // Whitespace tokens of the grammatical members.
  double mean_tokens = 0.0;
  double mean_tokens_without_punctuation = 0.0;
  // Distinct non-punctuation tokens over both members of every pair.
  std::size_t word_forms = 0;
  // Distinct lemmas: explicit lexicon lemmas, plus every remaining word form
  // standing for itself. Needs the grammars.
  std::optional<std::size_t> lexemes;
};

bool is_punctuation(const std::string& token);

CorpusStats corpus_stats(const std::vector<MinimalPair>& pairs,
                         const std::vector<CaseGrammar>* grammars = nullptr);

// Human-readable summary with the deviation from the reference figures.
std::string render_stats(const CorpusStats& stats);
std::string stats_json(const CorpusStats& stats);

}  // namespace agreebench
