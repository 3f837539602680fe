#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "agreebench/error.hpp"
#include "agreebench/grammar.hpp"
#include "support.hpp"

using namespace agreebench;
using testing_support::shipped_grammars;

namespace {

const char* kAutorenGrammar = R"(S -> NP V '.'
NP -> ART N
ART -> 'Die'
N -> 'Autoren' | 'Richterinnen'
V -> 'lachen' | 'reden'
)";

// Plain recursive expansion with no memo and no shared subtrees.
std::vector<std::vector<std::string>> naive_expand(const Grammar& g,
                                                   const std::string& cat,
                                                   const FeatureBundle& constraint,
                                                   int depth = 0) {
  if (depth > 64) throw std::runtime_error("too deep");
  struct Alt {
    std::size_t order;
    const Production* p;
    const LexiconEntry* e;
  };
  std::vector<Alt> alts;
  for (const auto& p : g.productions)
    if (p.lhs == cat) alts.push_back({p.order, &p, nullptr});
  for (const auto& e : g.lexicon)
    if (e.category == cat) alts.push_back({e.order, nullptr, &e});
  std::sort(alts.begin(), alts.end(),
            [](const Alt& a, const Alt& b) { return a.order < b.order; });

  std::vector<std::vector<std::string>> out;
  for (const auto& a : alts) {
    if (a.e) {
      if (unify(constraint, a.e->features)) out.push_back({a.e->surface});
      continue;
    }
    if (!unify(constraint, a.p->lhs_features)) continue;
    std::vector<std::vector<std::string>> acc = {{}};
    for (const auto& s : a.p->rhs) {
      std::vector<std::vector<std::string>> options;
      if (s.is_terminal())
        options = {{s.name}};
      else
        options = naive_expand(g, s.name, s.features, depth + 1);
      std::vector<std::vector<std::string>> next;
      for (const auto& prefix : acc)
        for (const auto& o : options) {
          auto joined = prefix;
          joined.insert(joined.end(), o.begin(), o.end());
          next.push_back(std::move(joined));
        }
      acc = std::move(next);
    }
    out.insert(out.end(), acc.begin(), acc.end());
  }
  return out;
}

std::vector<std::vector<std::string>> tokens_of(const std::vector<Sentence>& s) {
  std::vector<std::vector<std::string>> out;
  for (const auto& x : s) out.push_back(x.tokens);
  return out;
}

bool has_kind(const std::vector<Diagnostic>& d, Diagnostic::Kind k) {
  return std::any_of(d.begin(), d.end(), [k](const Diagnostic& x) { return x.kind == k; });
}

}  // namespace

TEST(Grammar, ParsesTwoNounTwoVerbGrammar) {
  auto g = parse_grammar(kAutorenGrammar);
  EXPECT_EQ(g.start, "S");
  std::size_t nouns = 0, verbs = 0, articles = 0;
  for (const auto& e : g.lexicon) {
    nouns += e.category == "N";
    verbs += e.category == "V";
    articles += e.category == "ART";
  }
  EXPECT_EQ(nouns, 2u);
  EXPECT_EQ(verbs, 2u);
  EXPECT_EQ(articles, 1u);
  EXPECT_TRUE(validate_grammar(g).empty());
}

TEST(Grammar, EnumeratesTwoNounTwoVerbGrammarInOrder) {
  auto sentences = enumerate_sentences(parse_grammar(kAutorenGrammar));
  std::vector<std::string> text;
  for (const auto& s : sentences) text.push_back(join_tokens(s.tokens));
  EXPECT_EQ(text, (std::vector<std::string>{
                      "Die Autoren lachen .", "Die Autoren reden .",
                      "Die Richterinnen lachen .", "Die Richterinnen reden ."}));
}

TEST(Grammar, SingleProductionGivesOneSentence) {
  auto g = parse_grammar("S -> 'Hallo' '.'\n");
  auto s = enumerate_sentences(g);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(join_tokens(s[0].tokens), "Hallo .");
}

TEST(Grammar, OneSubjectOneVerb) {
  auto g = parse_grammar("S -> NP V\nNP -> 'Er'\nV -> 'lacht'\n");
  EXPECT_EQ(enumerate_sentences(g).size(), 1u);
}

TEST(Grammar, UndefinedNonterminalIsUnproductive) {
  try {
    parse_grammar("S -> NP X '.'\nNP -> 'Er'\n");
    FAIL() << "expected an error";
  } catch (const GrammarError& e) {
    EXPECT_NE(std::string(e.what()).find("unproductive nonterminal X"), std::string::npos);
  }
}

TEST(Grammar, SyntaxErrorsCarryPosition) {
  try {
    parse_grammar("S -> 'a'\nT -> 'unterminated\n");
    FAIL() << "expected an error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 0u);
  }
}

TEST(Grammar, UnknownFeatureValueIsRejected) {
  EXPECT_THROW(parse_grammar("S -> V[num=du]\nV[num=du] -> 'x'\n"), ParseError);
}

TEST(Grammar, DuplicateLexiconKeyIsRejected) {
  EXPECT_THROW(parse_grammar("S -> V\nV[num=sg] -> 'lacht'<lachen>\n"
                             "V[num=sg] -> 'lacht'<lachen>\n"),
               ParseError);
}

TEST(Grammar, CommentsAndContinuationLines) {
  auto g = parse_grammar("# header\nS -> V '.'  # trailing\nV -> 'a'\n  | 'b' | '#'\n");
  auto s = enumerate_sentences(g);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(join_tokens(s[2].tokens), "# .");
}

TEST(Grammar, SelfRecursionIsACycle) {
  auto g = parse_grammar("S -> NP 'lacht'\nNP -> NP 'und' NP | 'Er'\n");
  auto d = validate_grammar(g);
  ASSERT_TRUE(has_kind(d, Diagnostic::Kind::kCycle));
  auto it = std::find_if(d.begin(), d.end(), [](const Diagnostic& x) {
    return x.kind == Diagnostic::Kind::kCycle;
  });
  EXPECT_NE(it->message.find("NP"), std::string::npos);
  EXPECT_THROW(enumerate_sentences(g), GrammarError);
}

TEST(Grammar, UnpairedVerbLemma) {
  auto g = parse_grammar(
      "%locus V\nS -> 'Er' V[num=sg]\n"
      "V[num=sg] -> 'lacht'<lachen> | 'redet'<reden>\nV[num=pl] -> 'reden'<reden>\n");
  EXPECT_TRUE(has_kind(validate_grammar(g), Diagnostic::Kind::kUnpairedLemma));
}

TEST(Grammar, UnreachableRule) {
  auto g = parse_grammar("S -> 'a'\nT -> 'b'\n");
  EXPECT_TRUE(has_kind(validate_grammar(g), Diagnostic::Kind::kUnreachable));
}

TEST(Grammar, NoUnifyingAlternative) {
  auto g = parse_grammar("S -> V[num=pl]\nV[num=sg] -> 'lacht'\n");
  EXPECT_FALSE(validate_grammar(g).empty());
}

TEST(Grammar, AgreementFiltersCombinations) {
  auto g = parse_grammar(
      "S -> NP[num=sg] V[num=sg] | NP[num=pl] V[num=pl]\n"
      "NP[num=sg] -> 'Das' 'Kind'\nNP[num=pl] -> 'Die' 'Kinder'\n"
      "V[num=sg] -> 'lacht'<lachen>\nV[num=pl] -> 'lachen'<lachen>\n");
  auto s = enumerate_sentences(g);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(join_tokens(s[0].tokens), "Das Kind lacht");
  EXPECT_EQ(join_tokens(s[1].tokens), "Die Kinder lachen");
}

TEST(Grammar, SixtySentencesMatchNaiveExpansion) {
  auto g = parse_grammar(
      "S -> ART N V '.'\nART -> 'der' | 'ein' | 'jener'\n"
      "N -> 'Autor' | 'Pilot' | 'Arzt' | 'Bauer'\n"
      "V -> 'lacht' | 'redet' | 'schläft' | 'trinkt' | 'singt'\n");
  auto s = enumerate_sentences(g);
  EXPECT_EQ(s.size(), 60u);
  EXPECT_EQ(tokens_of(s), naive_expand(g, g.start, {}));
}

TEST(Grammar, ShippedGrammarsMatchNaiveExpansion) {
  for (const auto& cg : shipped_grammars()) {
    const Grammar& g = *cg.spec.grammar;
    ASSERT_EQ(tokens_of(enumerate_sentences(g)), naive_expand(g, g.start, {}))
        << cg.path;
  }
}

TEST(Grammar, EnumerationIsDeterministic) {
  for (const auto& cg : shipped_grammars()) {
    auto a = enumerate_sentences(*cg.spec.grammar);
    auto b = enumerate_sentences(*cg.spec.grammar);
    ASSERT_EQ(tokens_of(a), tokens_of(b));
  }
}

TEST(Grammar, DerivationNodesCarryConsistentFeatures) {
  for (const auto& cg : shipped_grammars()) {
    const Grammar& g = *cg.spec.grammar;
    for (const auto& s : enumerate_sentences(g)) {
      for (const auto& located : s.derivation.preorder()) {
        const auto* node = located.node;
        if (node->lexicon >= 0) {
          ASSERT_TRUE(unify(node->features, g.lexicon[node->lexicon].features));
        }
        if (node->production >= 0) {
          ASSERT_TRUE(unify(node->features, g.productions[node->production].lhs_features));
        }
      }
      ASSERT_EQ(s.derivation.tokens(g), s.tokens);
    }
  }
}

TEST(Grammar, RenderRoundTripsShippedGrammars) {
  for (const auto& cg : shipped_grammars()) {
    const Grammar& g = *cg.spec.grammar;
    ASSERT_EQ(parse_grammar(render_grammar(g)), g) << cg.path;
  }
}

TEST(Grammar, ShippedGrammarsValidate) {
  for (const auto& cg : shipped_grammars())
    EXPECT_TRUE(validate_grammar(*cg.spec.grammar).empty()) << cg.path;
}

TEST(Grammar, LemmaTagsAndLiteralTerminals) {
  auto g = parse_grammar("S -> 'a\\'b' V\nV[num=sg] -> 'lacht'<lachen>\n");
  ASSERT_EQ(g.lexicon.size(), 1u);
  EXPECT_EQ(g.lexicon[0].lemma, "lachen");
  EXPECT_TRUE(g.lexicon[0].explicit_lemma);
  auto s = enumerate_sentences(g);
  EXPECT_EQ(s[0].tokens[0], "a'b");
}
