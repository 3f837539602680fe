#include "agreebench/pairgen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "agreebench/checksum.hpp"
#include "agreebench/error.hpp"

namespace agreebench {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    std::size_t end = s.find(sep, begin);
    out.push_back(trim(s.substr(begin, end == std::string_view::npos
                                           ? std::string_view::npos
                                           : end - begin)));
    if (end == std::string_view::npos) break;
    begin = end + 1;
  }
  return out;
}

[[noreturn]] void spec_fail(const Directive& d, const std::string& message) {
  throw CaseSpecError("line " + std::to_string(d.line) + ": %" + d.name + " " +
                      message);
}

// Splits "name(a, b)" into name and argument text.
std::pair<std::string, std::string> call_form(const Directive& d,
                                              std::string_view text) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open || !trim(text.substr(close + 1)).empty()) {
    spec_fail(d, "malformed term '" + std::string(text) + "'");
  }
  return {trim(text.substr(0, open)),
          std::string(text.substr(open + 1, close - open - 1))};
}

ConditionRule parse_condition(const Directive& d) {
  ConditionRule rule;
  std::istringstream in(d.args);
  std::string word;
  while (in >> word) {
    auto [name, args] = call_form(d, word);
    ConditionTerm term;
    if (name == "tag") {
      term.kind = ConditionTerm::Kind::kTag;
      for (const auto& item : split(args, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
          spec_fail(d, "tag item '" + item + "' needs CATEGORY:label");
        term.tags.emplace_back(trim(item.substr(0, colon)),
                               trim(item.substr(colon + 1)));
      }
    } else if (auto kind = parse_feature_kind(name)) {
      term.kind = ConditionTerm::Kind::kFeature;
      term.feature = *kind;
      term.categories = split(args, '|');
    } else {
      spec_fail(d, "unknown condition term '" + name + "'");
    }
    rule.terms.push_back(std::move(term));
  }
  if (rule.terms.empty()) spec_fail(d, "needs at least one term");
  return rule;
}

ExclusionRule parse_exclusion(const Directive& d) {
  auto colon = d.args.find(':');
  if (colon == std::string::npos) spec_fail(d, "needs 'name: predicate'");
  ExclusionRule rule;
  rule.name = trim(d.args.substr(0, colon));
  for (const auto& conjunct : split(d.args.substr(colon + 1), '&')) {
    auto [name, args] = call_form(d, conjunct);
    if (name != "ambiguous") spec_fail(d, "unknown predicate '" + name + "'");
    auto parts = split(args, ',');
    if (parts.size() != 4)
      spec_fail(d, "ambiguous() takes CATEGORIES, feature, value, value");
    AmbiguityTest test;
    test.categories = split(parts[0], '|');
    auto kind = parse_feature_kind(parts[1]);
    if (!kind) spec_fail(d, "unknown feature '" + parts[1] + "'");
    test.feature = *kind;
    test.first_value = parts[2];
    test.second_value = parts[3];
    rule.all_of.push_back(std::move(test));
  }
  return rule;
}

std::optional<FeatureBundle> with_value(FeatureBundle f, FeatureKind kind,
                                        std::string_view value) {
  switch (kind) {
    case FeatureKind::kNumber:
      f.number = parse_number(value);
      if (!f.number) return std::nullopt;
      break;
    case FeatureKind::kPerson:
      f.person = parse_person(value);
      if (!f.person) return std::nullopt;
      break;
    case FeatureKind::kCase:
      f.grammatical_case = parse_case(value);
      if (!f.grammatical_case) return std::nullopt;
      break;
  }
  return f;
}

const DerivationNode* first_of(const std::vector<LocatedNode>& nodes,
                               const std::vector<std::string>& categories) {
  for (const auto& located : nodes)
    if (std::find(categories.begin(), categories.end(),
                  located.node->category) != categories.end())
      return located.node;
  return nullptr;
}

}  // namespace

TestCaseSpec make_case_spec(std::shared_ptr<const Grammar> grammar) {
  TestCaseSpec spec;
  const Grammar& g = *grammar;
  const Directive* phen = g.directive("phenomenon");
  if (!phen) throw CaseSpecError("grammar has no %phenomenon directive");
  auto p = parse_phenomenon(phen->args);
  if (!p) spec_fail(*phen, "unknown phenomenon '" + phen->args + "'");
  spec.phenomenon = *p;

  const Directive* locus = g.directive("locus");
  if (!locus) throw CaseSpecError("grammar has no %locus directive");
  spec.locus = locus->args;
  if (spec.locus.empty() || spec.locus.find(' ') != std::string::npos)
    spec_fail(*locus, "takes exactly one category");

  if (const Directive* flip = g.directive("flip")) {
    auto kind = parse_feature_kind(flip->args);
    if (!kind) spec_fail(*flip, "unknown feature '" + flip->args + "'");
    spec.flip = *kind;
  }

  const Directive* condition = g.directive("condition");
  if (!condition) throw CaseSpecError("grammar has no %condition directive");
  spec.condition_rule = parse_condition(*condition);

  for (const Directive* d : g.directives_named("exclude"))
    spec.exclusions.push_back(parse_exclusion(*d));
  for (const Directive* d : g.directives_named("note"))
    spec.notes.push_back(d->args);

  spec.grammar = std::move(grammar);
  return spec;
}

const LexiconEntry& counterpart(const Grammar& g, const LexiconEntry& entry,
                                FeatureKind kind) {
  auto flipped = flip_feature(entry.features, kind);
  if (!flipped) {
    throw CaseSpecError("'" + entry.surface + "' (" + entry.category +
                        to_string(entry.features) + ") cannot be flipped in " +
                        std::string(to_string(kind)));
  }
  const LexiconEntry* other = g.find_entry(entry.lemma, entry.category, *flipped);
  if (!other) {
    throw CaseSpecError("unpaired lemma " + entry.lemma + ": no " +
                        entry.category + to_string(*flipped) + " form of '" +
                        entry.surface + "'");
  }
  return *other;
}

LocatedNode find_locus(const Derivation& d, const TestCaseSpec& spec) {
  auto found = d.find(spec.locus);
  if (found.empty())
    throw CaseSpecError("locus " + spec.locus + " not found in derivation");
  if (found.size() > 1)
    throw CaseSpecError("locus " + spec.locus + " occurs " +
                        std::to_string(found.size()) + " times in derivation");
  if (found[0].node->lexicon < 0)
    throw CaseSpecError("locus " + spec.locus + " is not a lexicon category");
  return found[0];
}

std::string flip_locus(const Derivation& d, const TestCaseSpec& spec) {
  const LexiconEntry& entry =
      spec.grammar->lexicon[find_locus(d, spec).node->lexicon];
  return counterpart(*spec.grammar, entry, spec.flip).surface;
}

std::string tag_condition(const Derivation& d, const TestCaseSpec& spec) {
  auto nodes = d.preorder();
  std::string label;
  for (const auto& term : spec.condition_rule.terms) {
    if (term.kind == ConditionTerm::Kind::kTag) {
      bool matched = false;
      for (const auto& [category, tag] : term.tags) {
        if (first_of(nodes, {category})) {
          label += tag;
          matched = true;
          break;
        }
      }
      if (!matched)
        throw CaseSpecError("no tag category of the condition rule occurs in "
                            "the derivation");
      continue;
    }
    const DerivationNode* node = first_of(nodes, term.categories);
    std::string names;
    for (const auto& c : term.categories) names += (names.empty() ? "" : "|") + c;
    if (!node)
      throw CaseSpecError("condition category " + names +
                          " not found in derivation");
    auto value = feature_value(node->features, term.feature);
    if (!value)
      throw CaseSpecError("condition category " + names + " has no " +
                          std::string(to_string(term.feature)) + " feature");
    label += *value;
  }
  return label;
}

std::optional<std::string> excluded_by(const Derivation& d,
                                       const TestCaseSpec& spec) {
  if (spec.exclusions.empty()) return std::nullopt;
  const Grammar& g = *spec.grammar;
  auto nodes = d.preorder();
  for (const auto& rule : spec.exclusions) {
    bool fires = !rule.all_of.empty();
    for (const auto& test : rule.all_of) {
      const DerivationNode* node = first_of(nodes, test.categories);
      if (!node) {
        fires = false;
        break;
      }
      if (node->lexicon < 0)
        throw CaseSpecError("exclusion '" + rule.name +
                            "' tests a non-lexical node " + node->category);
      const LexiconEntry& entry = g.lexicon[node->lexicon];
      auto a = with_value(entry.features, test.feature, test.first_value);
      auto b = with_value(entry.features, test.feature, test.second_value);
      if (!a || !b)
        throw CaseSpecError("exclusion '" + rule.name + "' has a bad value");
      const LexiconEntry* ea = g.find_entry(entry.lemma, entry.category, *a);
      const LexiconEntry* eb = g.find_entry(entry.lemma, entry.category, *b);
      if (!ea || !eb)
        throw CaseSpecError("exclusion '" + rule.name + "': paradigm of '" +
                            entry.lemma + "' lacks " + test.first_value +
                            " or " + test.second_value);
      if (ea->surface != eb->surface) {
        fires = false;
        break;
      }
    }
    if (fires) return rule.name;
  }
  return std::nullopt;
}

std::vector<MinimalPair> generate_pairs(const TestCaseSpec& spec) {
  const Grammar& g = *spec.grammar;
  auto sentences = enumerate_sentences(g);

  std::unordered_set<std::string> grammatical;
  grammatical.reserve(sentences.size());
  for (const auto& s : sentences) grammatical.insert(join_tokens(s.tokens));

  std::vector<MinimalPair> out;
  for (const auto& s : sentences) {
    LocatedNode locus = find_locus(s.derivation, spec);
    std::string flipped = flip_locus(s.derivation, spec);
    std::string condition = tag_condition(s.derivation, spec);
    if (excluded_by(s.derivation, spec)) continue;

    MinimalPair pair;
    pair.phenomenon = spec.phenomenon;
    pair.condition = std::move(condition);
    pair.grammatical = s.tokens;
    pair.ungrammatical = s.tokens;
    pair.ungrammatical[locus.first_token] = flipped;
    pair.locus_index = locus.first_token;
    if (grammatical.count(join_tokens(pair.ungrammatical))) {
      throw CaseSpecError("flipping the locus of '" +
                          join_tokens(pair.grammatical) +
                          "' yields another grammatical sentence");
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05zu", out.size());
    pair.id = std::string(id(spec.phenomenon)) + "-" + buf;
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<CaseGrammar> load_case_grammars(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error("grammar directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".cfg")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<CaseGrammar> out;
  std::string problems;
  for (const auto& path : files) {
    auto grammar = std::make_shared<const Grammar>(load_grammar(path));
    auto diagnostics = validate_grammar(*grammar);
    for (const auto& d : diagnostics)
      problems += path.filename().string() + ": " + d.message + "\n";
    if (!diagnostics.empty()) continue;
    out.push_back({path, sha256_file(path), make_case_spec(grammar)});
  }
  if (!problems.empty()) throw GrammarError(problems);
  std::stable_sort(out.begin(), out.end(),
                   [](const CaseGrammar& a, const CaseGrammar& b) {
                     return a.spec.phenomenon < b.spec.phenomenon;
                   });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].spec.phenomenon == out[i - 1].spec.phenomenon)
      throw CaseSpecError("phenomenon " +
                          std::string(id(out[i].spec.phenomenon)) +
                          " defined by both " + out[i - 1].path.string() +
                          " and " + out[i].path.string());
  }
  return out;
}

}  // namespace agreebench
