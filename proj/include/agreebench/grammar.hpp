#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "agreebench/features.hpp"

namespace agreebench {

struct Symbol {
  enum class Kind { kTerminal, kNonterminal };

  Kind kind = Kind::kNonterminal;
  // Surface string for terminals, category name for nonterminals.
  std::string name;
  // Constraint for nonterminals; always empty for terminals.
  FeatureBundle features;

  bool is_terminal() const { return kind == Kind::kTerminal; }
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

struct Production {
  std::string lhs;
  FeatureBundle lhs_features;
  std::vector<Symbol> rhs;
  // Position among all alternatives of the file; fixes enumeration order.
  std::size_t order = 0;
  std::size_t line = 0;

  friend bool operator==(const Production& a, const Production& b) {
    return a.lhs == b.lhs && a.lhs_features == b.lhs_features &&
           a.rhs == b.rhs && a.order == b.order;
  }
};

// A single-terminal alternative: `V[num=sg,per=3] -> 'lacht'<lachen>`.
struct LexiconEntry {
  std::string lemma;
  std::string category;
  FeatureBundle features;
  std::string surface;
  // False when the lemma defaulted to the surface form.
  bool explicit_lemma = false;
  std::size_t order = 0;
  std::size_t line = 0;

  friend bool operator==(const LexiconEntry& a, const LexiconEntry& b) {
    return a.lemma == b.lemma && a.category == b.category &&
           a.features == b.features && a.surface == b.surface &&
           a.explicit_lemma == b.explicit_lemma && a.order == b.order;
  }
};

// `%name args` lines. Grammar-core interprets `start`, `locus` and `flip`;
// the rest belongs to the test-case layer.
struct Directive {
  std::string name;
  std::string args;
  std::size_t line = 0;

  friend bool operator==(const Directive& a, const Directive& b) {
    return a.name == b.name && a.args == b.args;
  }
};

struct Grammar {
  std::string start;
  std::vector<Production> productions;
  std::vector<LexiconEntry> lexicon;
  std::vector<Directive> directives;

  // First directive with this name, or nullptr.
  const Directive* directive(std::string_view name) const;
  std::vector<const Directive*> directives_named(std::string_view name) const;

  bool defines(std::string_view nonterminal) const;

  // Entry with exactly this key, or nullptr.
  const LexiconEntry* find_entry(std::string_view lemma,
                                 std::string_view category,
                                 const FeatureBundle& features) const;

  friend bool operator==(const Grammar&, const Grammar&) = default;
};

// Parses the line-oriented grammar notation:
//
//   # comment
//   %locus V
//   S -> NP[num=sg] V[num=sg] '.' | NP[num=pl] V[num=pl] '.'
//   V[num=sg,per=3] -> 'lacht'<lachen> | 'redet'<reden>
//      | 'trinkt'<trinken>
//
// Lines starting with `|` continue the previous rule. Throws ParseError on
// syntax errors, unknown feature values and duplicate lexicon keys, and
// GrammarError when a right-hand side names an undefined nonterminal.
Grammar parse_grammar(std::string_view text);
Grammar load_grammar(const std::filesystem::path& path);

// Canonical text form, one alternative per line, such that
// parse_grammar(render_grammar(g)) == g.
std::string render_grammar(const Grammar& g);

struct Diagnostic {
  enum class Kind {
    kUnproductive,
    kNoUnifyingAlternative,
    kUnreachable,
    kCycle,
    kUnpairedLemma,
    kBadDirective,
  };
  Kind kind;
  std::string message;
};

std::string_view to_string(Diagnostic::Kind kind);

// Empty iff the grammar is productive, fully reachable, acyclic and every
// inflected entry of a paired category has its flip counterpart. Paired
// categories are those named by `%locus` and `%paired`; the pairing feature
// is `%flip` (default num).
std::vector<Diagnostic> validate_grammar(const Grammar& g);

struct DerivationNode {
  // Category for nonterminal nodes and lexicon leaves; empty for literals.
  std::string category;
  FeatureBundle features;
  // Index into Grammar::productions, or -1.
  int production = -1;
  // Index into Grammar::lexicon, or -1.
  int lexicon = -1;
  // Surface of a literal terminal leaf.
  std::string literal;
  std::vector<std::shared_ptr<const DerivationNode>> children;
  std::size_t num_tokens = 0;

  bool is_leaf() const { return children.empty(); }
};

struct LocatedNode {
  const DerivationNode* node;
  std::size_t first_token;
};

// Immutable derivation tree. Subtrees are shared between derivations.
class Derivation {
 public:
  Derivation() = default;
  explicit Derivation(std::shared_ptr<const DerivationNode> root)
      : root_(std::move(root)) {}

  const DerivationNode& root() const { return *root_; }

  // All nodes in preorder, each with the index of its first token.
  std::vector<LocatedNode> preorder() const;
  std::vector<LocatedNode> find(std::string_view category) const;

  // Leaf surfaces joined left to right.
  std::vector<std::string> tokens(const Grammar& g) const;

 private:
  std::shared_ptr<const DerivationNode> root_;
};

struct Sentence {
  Derivation derivation;
  std::vector<std::string> tokens;
};

// Every derivation licensed by `g`, leftmost choice most significant and
// alternatives in file order. Requires validate_grammar(g) to be empty;
// throws GrammarError on recursion.
std::vector<Sentence> enumerate_sentences(const Grammar& g);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace agreebench
