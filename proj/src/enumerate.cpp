#include <algorithm>
#include <map>
#include <set>

#include "agreebench/error.hpp"
#include "agreebench/grammar.hpp"

namespace agreebench {

namespace {

using NodePtr = std::shared_ptr<const DerivationNode>;

struct Expansion {
  NodePtr node;
  std::vector<std::string> tokens;
};

class Enumerator {
 public:
  explicit Enumerator(const Grammar& g) : g_(g) {
    for (std::size_t i = 0; i < g.productions.size(); ++i)
      alternatives_[g.productions[i].lhs].push_back(
          {g.productions[i].order, static_cast<int>(i), -1});
    for (std::size_t i = 0; i < g.lexicon.size(); ++i)
      alternatives_[g.lexicon[i].category].push_back(
          {g.lexicon[i].order, -1, static_cast<int>(i)});
    for (auto& [name, alts] : alternatives_)
      std::sort(alts.begin(), alts.end(),
                [](const Alt& a, const Alt& b) { return a.order < b.order; });
  }

  const std::vector<Expansion>& expand(const std::string& category,
                                       const FeatureBundle& constraint) {
    auto key = std::make_pair(category, to_string(constraint));
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (!active_.insert(category).second)
      throw GrammarError("recursive nonterminal " + category);

    std::vector<Expansion> out;
    for (const Alt& alt : alternatives_[category]) {
      if (alt.lexicon >= 0) {
        const LexiconEntry& e = g_.lexicon[alt.lexicon];
        auto features = unify(constraint, e.features);
        if (!features) continue;
        auto node = std::make_shared<DerivationNode>();
        node->category = category;
        node->features = *features;
        node->lexicon = alt.lexicon;
        node->num_tokens = 1;
        out.push_back({std::move(node), {e.surface}});
        continue;
      }
      const Production& p = g_.productions[alt.production];
      auto features = unify(constraint, p.lhs_features);
      if (!features) continue;

      // Cartesian product over the right-hand side, leftmost choice slowest.
      struct Partial {
        std::vector<NodePtr> children;
        std::vector<std::string> tokens;
      };
      std::vector<Partial> partials(1);
      for (const Symbol& s : p.rhs) {
        std::vector<Partial> next;
        if (s.is_terminal()) {
          auto leaf = std::make_shared<DerivationNode>();
          leaf->literal = s.name;
          leaf->num_tokens = 1;
          for (auto& partial : partials) {
            partial.children.push_back(leaf);
            partial.tokens.push_back(s.name);
          }
          continue;
        }
        const auto& options = expand(s.name, s.features);
        next.reserve(partials.size() * options.size());
        for (const auto& partial : partials) {
          for (const auto& option : options) {
            Partial grown = partial;
            grown.children.push_back(option.node);
            grown.tokens.insert(grown.tokens.end(), option.tokens.begin(),
                                option.tokens.end());
            next.push_back(std::move(grown));
          }
        }
        partials = std::move(next);
        if (partials.empty()) break;
      }
      for (auto& partial : partials) {
        auto node = std::make_shared<DerivationNode>();
        node->category = category;
        node->features = *features;
        node->production = alt.production;
        node->num_tokens = partial.tokens.size();
        node->children = std::move(partial.children);
        out.push_back({std::move(node), std::move(partial.tokens)});
      }
    }
    active_.erase(category);
    return memo_.emplace(key, std::move(out)).first->second;
  }

 private:
  struct Alt {
    std::size_t order;
    int production;
    int lexicon;
  };

  const Grammar& g_;
  std::map<std::string, std::vector<Alt>> alternatives_;
  std::map<std::pair<std::string, std::string>, std::vector<Expansion>> memo_;
  std::set<std::string> active_;
};

void walk(const DerivationNode& node, std::size_t first,
          std::vector<LocatedNode>& out) {
  out.push_back({&node, first});
  for (const auto& child : node.children) {
    walk(*child, first, out);
    first += child->num_tokens;
  }
}

}  // namespace

std::vector<LocatedNode> Derivation::preorder() const {
  std::vector<LocatedNode> out;
  if (root_) walk(*root_, 0, out);
  return out;
}

std::vector<LocatedNode> Derivation::find(std::string_view category) const {
  std::vector<LocatedNode> out;
  for (const auto& located : preorder())
    if (located.node->category == category) out.push_back(located);
  return out;
}

std::vector<std::string> Derivation::tokens(const Grammar& g) const {
  std::vector<std::string> out;
  for (const auto& located : preorder()) {
    const DerivationNode& n = *located.node;
    if (!n.is_leaf()) continue;
    out.push_back(n.lexicon >= 0 ? g.lexicon[n.lexicon].surface : n.literal);
  }
  return out;
}

std::vector<Sentence> enumerate_sentences(const Grammar& g) {
  Enumerator enumerator(g);
  const auto& expansions = enumerator.expand(g.start, FeatureBundle{});
  std::vector<Sentence> out;
  out.reserve(expansions.size());
  for (const auto& e : expansions) out.push_back({Derivation(e.node), e.tokens});
  return out;
}

}  // namespace agreebench
