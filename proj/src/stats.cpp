#include "agreebench/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <json.hpp>
#include <set>
#include <sstream>

namespace agreebench {

bool is_punctuation(const std::string& token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](unsigned char c) {
           return c < 0x80 && std::ispunct(c);
         });
}

CorpusStats corpus_stats(const std::vector<MinimalPair>& pairs,
                         const std::vector<CaseGrammar>* grammars) {
  CorpusStats s;
  s.total_pairs = pairs.size();
  std::set<std::string> forms;
  std::size_t tokens = 0, words = 0;
  for (const auto& p : pairs) {
    ++s.pairs_per_phenomenon[std::string(id(p.phenomenon))];
    tokens += p.grammatical.size();
    for (const auto* sentence : {&p.grammatical, &p.ungrammatical})
      for (const auto& t : *sentence)
        if (!is_punctuation(t)) forms.insert(t);
    for (const auto& t : p.grammatical)
      if (!is_punctuation(t)) ++words;
  }
  s.word_forms = forms.size();
  if (!pairs.empty()) {
    s.mean_tokens = static_cast<double>(tokens) / static_cast<double>(pairs.size());
    s.mean_tokens_without_punctuation =
        static_cast<double>(words) / static_cast<double>(pairs.size());
  }
  if (!s.pairs_per_phenomenon.empty()) {
    s.min_pairs_per_phenomenon = SIZE_MAX;
    for (const auto& [name, n] : s.pairs_per_phenomenon) {
      s.min_pairs_per_phenomenon = std::min(s.min_pairs_per_phenomenon, n);
      s.max_pairs_per_phenomenon = std::max(s.max_pairs_per_phenomenon, n);
    }
    s.mean_pairs_per_phenomenon = static_cast<double>(pairs.size()) /
                                  static_cast<double>(s.pairs_per_phenomenon.size());
  }

  if (grammars) {
    std::set<std::string> lemmas;
    std::set<std::string> covered;
    for (const auto& cg : *grammars)
      for (const auto& e : cg.spec.grammar->lexicon)
        if (e.explicit_lemma && forms.count(e.surface)) {
          lemmas.insert(e.lemma);
          covered.insert(e.surface);
        }
    for (const auto& f : forms)
      if (!covered.count(f)) lemmas.insert(f);
    s.lexemes = lemmas.size();
  }
  return s;
}

namespace {

std::string fixed(double x, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string deviation(double actual, double reference, int digits) {
  double d = actual - reference;
  return (d >= 0 ? "+" : "") + fixed(d, digits);
}

}  // namespace

std::string render_stats(const CorpusStats& s) {
  std::ostringstream out;
  out << "pairs: " << s.total_pairs << " (reference " << kReferenceSentences
      << ", deviation "
      << deviation(static_cast<double>(s.total_pairs), kReferenceSentences, 0)
      << ")\n";
  for (auto p : kAllPhenomena) {
    auto it = s.pairs_per_phenomenon.find(std::string(id(p)));
    out << "  " << id(p) << ": "
        << (it == s.pairs_per_phenomenon.end() ? 0 : it->second) << "\n";
  }
  out << "pairs per test case: mean " << fixed(s.mean_pairs_per_phenomenon, 2)
      << ", min " << s.min_pairs_per_phenomenon << ", max "
      << s.max_pairs_per_phenomenon << "\n";
  out << "mean tokens per sentence: " << fixed(s.mean_tokens, 2) << " (reference "
      << fixed(kReferenceMeanTokens, 2) << ", deviation "
      << deviation(s.mean_tokens, kReferenceMeanTokens, 2) << ")\n";
  out << "mean tokens without punctuation: "
      << fixed(s.mean_tokens_without_punctuation, 2) << " (deviation "
      << deviation(s.mean_tokens_without_punctuation, kReferenceMeanTokens, 2)
      << ")\n";
  out << "word forms: " << s.word_forms << " (reference " << kReferenceWordForms
      << ")\n";
  if (s.lexemes)
    out << "lexemes: " << *s.lexemes << " (reference " << kReferenceLexemes << ")\n";
  return out.str();
}

std::string stats_json(const CorpusStats& s) {
  nlohmann::json j;
  j["total_pairs"] = s.total_pairs;
  j["pairs_per_phenomenon"] = s.pairs_per_phenomenon;
  j["mean_pairs_per_phenomenon"] = s.mean_pairs_per_phenomenon;
  j["min_pairs_per_phenomenon"] = s.min_pairs_per_phenomenon;
  j["max_pairs_per_phenomenon"] = s.max_pairs_per_phenomenon;
  j["mean_tokens"] = s.mean_tokens;
  j["mean_tokens_without_punctuation"] = s.mean_tokens_without_punctuation;
  j["word_forms"] = s.word_forms;
  j["lexemes"] = s.lexemes ? nlohmann::json(*s.lexemes) : nlohmann::json(nullptr);
  j["reference"] = {{"sentences", kReferenceSentences},
                    {"mean_tokens", kReferenceMeanTokens},
                    {"lexemes", kReferenceLexemes},
                    {"word_forms", kReferenceWordForms}};
  return j.dump(2) + "\n";
}

}  // namespace agreebench
