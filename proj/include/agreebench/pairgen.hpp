#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agreebench/features.hpp"
#include "agreebench/grammar.hpp"
#include "agreebench/phenomenon.hpp"

namespace agreebench {

// One component of a condition label. Feature terms print the value of the
// first node whose category is listed (`num(MSUBJ|MSUBJ2)`); tag terms print
// the label of the first listed category present (`tag(SIMPLE:simple)`).
struct ConditionTerm {
  enum class Kind { kFeature, kTag };
  Kind kind = Kind::kFeature;
  FeatureKind feature = FeatureKind::kNumber;
  std::vector<std::string> categories;
  std::vector<std::pair<std::string, std::string>> tags;
};

struct ConditionRule {
  std::vector<ConditionTerm> terms;
};

// True when the lexicon entry under the first node of `categories` has the
// same surface for both values of `feature`, e.g. `die` in nom and acc.
struct AmbiguityTest {
  std::vector<std::string> categories;
  FeatureKind feature = FeatureKind::kCase;
  std::string first_value;
  std::string second_value;
};

// Removes a pair when every test holds for its grammatical derivation.
struct ExclusionRule {
  std::string name;
  std::vector<AmbiguityTest> all_of;
};

struct TestCaseSpec {
  Phenomenon phenomenon = Phenomenon::kSimpleSentence;
  std::shared_ptr<const Grammar> grammar;
  std::string locus;
  FeatureKind flip = FeatureKind::kNumber;
  ConditionRule condition_rule;
  std::vector<ExclusionRule> exclusions;
  std::vector<std::string> notes;
};

// Reads %phenomenon, %locus, %flip, %condition, %exclude and %note.
// Throws CaseSpecError when a required directive is missing or malformed.
TestCaseSpec make_case_spec(std::shared_ptr<const Grammar> grammar);

struct MinimalPair {
  std::string id;
  Phenomenon phenomenon = Phenomenon::kSimpleSentence;
  std::string condition;
  std::vector<std::string> grammatical;
  std::vector<std::string> ungrammatical;
  std::size_t locus_index = 0;

  friend bool operator==(const MinimalPair&, const MinimalPair&) = default;
};

// Entry of the same lemma and category with `kind` flipped.
// Throws CaseSpecError when the paradigm lacks that form.
const LexiconEntry& counterpart(const Grammar& g, const LexiconEntry& entry,
                                FeatureKind kind);

// The locus node of `d` and its token position. Throws CaseSpecError when the
// locus is missing, repeated, or not a lexicon leaf.
LocatedNode find_locus(const Derivation& d, const TestCaseSpec& spec);

std::string flip_locus(const Derivation& d, const TestCaseSpec& spec);
std::string tag_condition(const Derivation& d, const TestCaseSpec& spec);

// Name of the first exclusion rule that fires, if any.
std::optional<std::string> excluded_by(const Derivation& d,
                                       const TestCaseSpec& spec);

std::vector<MinimalPair> generate_pairs(const TestCaseSpec& spec);

// A directory of `*.cfg` grammars, one per phenomenon.
struct CaseGrammar {
  std::filesystem::path path;
  std::string sha256;
  TestCaseSpec spec;
};

// Loads and validates every grammar in `dir`, ordered by phenomenon.
// Throws GrammarError listing all diagnostics when any grammar is invalid.
std::vector<CaseGrammar> load_case_grammars(const std::filesystem::path& dir);

}  // namespace agreebench
