#include "agreebench/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "agreebench/error.hpp"

namespace agreebench {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Cursor over one logical line. Columns are 1-based byte offsets.
class LineScanner {
 public:
  LineScanner(std::string_view text, std::size_t line)
      : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r'))
      ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool consume(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view token) {
    if (!consume(token)) fail("expected '" + std::string(token) + "'");
  }

  std::string identifier() {
    skip_space();
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_]))
      fail("expected a symbol name");
    std::size_t begin = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(begin, pos_ - begin));
  }

  std::string quoted() {
    skip_space();
    std::size_t open = pos_;
    if (pos_ >= text_.size() || text_[pos_] != '\'') fail("expected a terminal");
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '\'') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    if (pos_ >= text_.size()) fail_at("unterminated terminal", open);
    ++pos_;
    if (out.empty()) fail_at("empty terminal", open);
    return out;
  }

  // Optional `<lemma>` directly after a terminal.
  std::optional<std::string> lemma_tag() {
    if (pos_ >= text_.size() || text_[pos_] != '<') return std::nullopt;
    std::size_t open = pos_++;
    std::size_t begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != '>' && text_[pos_] != ' ')
      ++pos_;
    if (pos_ >= text_.size() || text_[pos_] != '>' || pos_ == begin)
      fail_at("malformed lemma tag", open);
    std::string lemma(text_.substr(begin, pos_ - begin));
    ++pos_;
    return lemma;
  }

  FeatureBundle features() {
    FeatureBundle out;
    if (pos_ >= text_.size() || text_[pos_] != '[') return out;
    ++pos_;
    std::set<FeatureKind> seen;
    while (true) {
      std::size_t key_pos = (skip_space(), pos_);
      std::string key = identifier();
      expect("=");
      skip_space();
      std::size_t value_pos = pos_;
      std::size_t begin = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      std::string value(text_.substr(begin, pos_ - begin));
      auto kind = parse_feature_kind(key);
      if (!kind) fail_at("unknown feature '" + key + "'", key_pos);
      if (!seen.insert(*kind).second)
        fail_at("feature '" + key + "' given twice", key_pos);
      bool ok = false;
      switch (*kind) {
        case FeatureKind::kNumber:
          out.number = parse_number(value);
          ok = out.number.has_value();
          break;
        case FeatureKind::kPerson:
          out.person = parse_person(value);
          ok = out.person.has_value();
          break;
        case FeatureKind::kCase:
          out.grammatical_case = parse_case(value);
          ok = out.grammatical_case.has_value();
          break;
      }
      if (!ok)
        fail_at("unknown feature value '" + value + "' for " + key, value_pos);
      if (consume("]")) break;
      expect(",");
    }
    return out;
  }

  std::size_t column() const { return pos_ + 1; }
  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& message) {
    skip_space();
    fail_at(message, pos_);
  }
  [[noreturn]] void fail_at(const std::string& message, std::size_t pos) {
    throw ParseError(message, line_, pos + 1);
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted && c == '\\') {
      ++i;
    } else if (c == '\'') {
      quoted = !quoted;
    } else if (c == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string quote_terminal(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

struct LexKey {
  std::string lemma, category, features;
  auto operator<=>(const LexKey&) const = default;
};

}  // namespace

const Directive* Grammar::directive(std::string_view name) const {
  for (const auto& d : directives)
    if (d.name == name) return &d;
  return nullptr;
}

std::vector<const Directive*> Grammar::directives_named(
    std::string_view name) const {
  std::vector<const Directive*> out;
  for (const auto& d : directives)
    if (d.name == name) out.push_back(&d);
  return out;
}

bool Grammar::defines(std::string_view nonterminal) const {
  return std::any_of(productions.begin(), productions.end(),
                     [&](const Production& p) { return p.lhs == nonterminal; }) ||
         std::any_of(lexicon.begin(), lexicon.end(), [&](const LexiconEntry& e) {
           return e.category == nonterminal;
         });
}

const LexiconEntry* Grammar::find_entry(std::string_view lemma,
                                        std::string_view category,
                                        const FeatureBundle& features) const {
  for (const auto& e : lexicon)
    if (e.lemma == lemma && e.category == category && e.features == features)
      return &e;
  return nullptr;
}

Grammar parse_grammar(std::string_view text) {
  Grammar g;
  std::set<LexKey> lexicon_keys;
  std::size_t order = 0;
  std::string current_lhs;
  FeatureBundle current_features;
  bool have_rule = false;

  auto parse_alternatives = [&](LineScanner& sc) {
    do {
      std::size_t alt_column = (sc.skip_space(), sc.column());
      std::vector<Symbol> items;
      std::optional<std::string> lemma;
      while (!sc.done() && sc.peek() != '|') {
        if (lemma) sc.fail("a lemma tag is only allowed on a single terminal");
        if (sc.peek() == '\'') {
          Symbol s;
          s.kind = Symbol::Kind::kTerminal;
          s.name = sc.quoted();
          lemma = sc.lemma_tag();
          items.push_back(std::move(s));
        } else if (is_ident_start(sc.peek())) {
          Symbol s;
          s.kind = Symbol::Kind::kNonterminal;
          s.name = sc.identifier();
          s.features = sc.features();
          items.push_back(std::move(s));
        } else {
          sc.fail(std::string("unexpected character '") + sc.peek() + "'");
        }
      }
      if (items.empty())
        throw ParseError("empty alternative", sc.line(), alt_column);
      if (items.size() == 1 && items[0].is_terminal()) {
        LexiconEntry e;
        e.category = current_lhs;
        e.features = current_features;
        e.surface = items[0].name;
        e.explicit_lemma = lemma.has_value();
        e.lemma = lemma ? *lemma : e.surface;
        e.order = order++;
        e.line = sc.line();
        LexKey key{e.lemma, e.category, to_string(e.features)};
        if (!lexicon_keys.insert(key).second) {
          throw ParseError("duplicate lexicon entry " + e.category +
                               to_string(e.features) + " for lemma '" +
                               e.lemma + "'",
                           sc.line(), alt_column);
        }
        g.lexicon.push_back(std::move(e));
      } else {
        if (lemma) sc.fail("a lemma tag is only allowed on a single terminal");
        Production p;
        p.lhs = current_lhs;
        p.lhs_features = current_features;
        p.rhs = std::move(items);
        p.order = order++;
        p.line = sc.line();
        g.productions.push_back(std::move(p));
      }
    } while (sc.consume("|"));
  };

  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;

    std::string_view body = strip_comment(raw);
    LineScanner sc(body, line_no);
    if (sc.done()) continue;

    if (sc.peek() == '%') {
      sc.consume("%");
      Directive d;
      d.name = sc.identifier();
      d.line = line_no;
      std::size_t col = sc.column() - 1;
      d.args = trim(body.substr(std::min(col, body.size())));
      g.directives.push_back(std::move(d));
      continue;
    }
    if (sc.consume("|")) {
      if (!have_rule) sc.fail("continuation line without a preceding rule");
      parse_alternatives(sc);
      continue;
    }
    current_lhs = sc.identifier();
    current_features = sc.features();
    sc.expect("->");
    have_rule = true;
    parse_alternatives(sc);
  }

  if (!have_rule) throw GrammarError("grammar has no productions");
  if (const Directive* d = g.directive("start")) {
    g.start = d->args;
  } else if (!g.productions.empty() &&
             (g.lexicon.empty() ||
              g.productions.front().order < g.lexicon.front().order)) {
    g.start = g.productions.front().lhs;
  } else {
    g.start = g.lexicon.front().category;
  }

  std::set<std::string> defined;
  for (const auto& p : g.productions) defined.insert(p.lhs);
  for (const auto& e : g.lexicon) defined.insert(e.category);
  if (!defined.count(g.start))
    throw GrammarError("start symbol " + g.start + " has no productions");
  for (const auto& p : g.productions) {
    for (const auto& s : p.rhs) {
      if (!s.is_terminal() && !defined.count(s.name)) {
        throw GrammarError("line " + std::to_string(p.line) +
                           ": unproductive nonterminal " + s.name);
      }
    }
  }
  return g;
}

Grammar load_grammar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open grammar " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_grammar(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " +
                         std::string(e.what()).substr(
                             std::string(e.what()).find(": ") + 2),
                     e.line(), e.column());
  }
}

std::string render_grammar(const Grammar& g) {
  std::ostringstream out;
  for (const auto& d : g.directives) {
    out << '%' << d.name;
    if (!d.args.empty()) out << ' ' << d.args;
    out << '\n';
  }
  struct Line {
    std::size_t order;
    std::string text;
  };
  std::vector<Line> lines;
  for (const auto& p : g.productions) {
    std::string text = p.lhs + to_string(p.lhs_features) + " ->";
    for (const auto& s : p.rhs) {
      text += ' ';
      text += s.is_terminal() ? quote_terminal(s.name)
                              : s.name + to_string(s.features);
    }
    lines.push_back({p.order, std::move(text)});
  }
  for (const auto& e : g.lexicon) {
    std::string text = e.category + to_string(e.features) + " -> " +
                       quote_terminal(e.surface);
    if (e.explicit_lemma) text += "<" + e.lemma + ">";
    lines.push_back({e.order, std::move(text)});
  }
  std::sort(lines.begin(), lines.end(),
            [](const Line& a, const Line& b) { return a.order < b.order; });
  for (const auto& l : lines) out << l.text << '\n';
  return out.str();
}

std::string_view to_string(Diagnostic::Kind kind) {
  switch (kind) {
    case Diagnostic::Kind::kUnproductive:
      return "unproductive";
    case Diagnostic::Kind::kNoUnifyingAlternative:
      return "no-unifying-alternative";
    case Diagnostic::Kind::kUnreachable:
      return "unreachable";
    case Diagnostic::Kind::kCycle:
      return "cycle";
    case Diagnostic::Kind::kUnpairedLemma:
      return "unpaired-lemma";
    case Diagnostic::Kind::kBadDirective:
      return "bad-directive";
  }
  return "?";
}

std::vector<Diagnostic> validate_grammar(const Grammar& g) {
  std::vector<Diagnostic> out;
  auto add = [&out](Diagnostic::Kind kind, std::string message) {
    out.push_back({kind, std::move(message)});
  };

  // Ordered so diagnostics come out deterministically.
  std::map<std::string, std::vector<FeatureBundle>> alternatives;
  std::map<std::string, std::set<std::string>> edges;
  for (const auto& p : g.productions) {
    alternatives[p.lhs].push_back(p.lhs_features);
    auto& e = edges[p.lhs];
    for (const auto& s : p.rhs)
      if (!s.is_terminal()) e.insert(s.name);
  }
  for (const auto& e : g.lexicon) {
    alternatives[e.category].push_back(e.features);
    edges[e.category];
  }

  std::set<std::string> reported;
  for (const auto& p : g.productions) {
    for (const auto& s : p.rhs) {
      if (s.is_terminal()) continue;
      auto it = alternatives.find(s.name);
      if (it == alternatives.end()) {
        if (reported.insert(s.name).second)
          add(Diagnostic::Kind::kUnproductive, "unproductive nonterminal " + s.name);
        continue;
      }
      bool any = std::any_of(it->second.begin(), it->second.end(),
                             [&](const FeatureBundle& f) {
                               return unify(f, s.features).has_value();
                             });
      if (!any) {
        add(Diagnostic::Kind::kNoUnifyingAlternative,
            "line " + std::to_string(p.line) + ": no alternative of " + s.name +
                " unifies with " + to_string(s.features));
      }
    }
  }

  if (!alternatives.count(g.start)) {
    add(Diagnostic::Kind::kUnproductive, "unproductive nonterminal " + g.start);
  } else {
    std::set<std::string> seen{g.start};
    std::vector<std::string> stack{g.start};
    while (!stack.empty()) {
      std::string n = stack.back();
      stack.pop_back();
      for (const auto& m : edges[n])
        if (alternatives.count(m) && seen.insert(m).second) stack.push_back(m);
    }
    for (const auto& [name, alts] : alternatives)
      if (!seen.count(name))
        add(Diagnostic::Kind::kUnreachable, "unreachable nonterminal " + name);
  }

  // Cycle search; each distinct cycle reported once by its entry node.
  enum class Mark { kNone, kActive, kDone };
  std::map<std::string, Mark> mark;
  std::vector<std::string> path;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    mark[n] = Mark::kActive;
    path.push_back(n);
    for (const auto& m : edges[n]) {
      if (!alternatives.count(m)) continue;
      if (mark[m] == Mark::kActive) {
        auto from = std::find(path.begin(), path.end(), m);
        std::string cycle;
        for (auto it = from; it != path.end(); ++it) cycle += *it + " -> ";
        add(Diagnostic::Kind::kCycle, "recursive nonterminal " + m + ": " +
                                          cycle + m);
      } else if (mark[m] == Mark::kNone) {
        visit(m);
      }
    }
    path.pop_back();
    mark[n] = Mark::kDone;
  };
  for (const auto& [name, alts] : alternatives)
    if (mark[name] == Mark::kNone) visit(name);

  FeatureKind flip = FeatureKind::kNumber;
  if (const Directive* d = g.directive("flip")) {
    if (auto k = parse_feature_kind(d->args)) {
      flip = *k;
    } else {
      add(Diagnostic::Kind::kBadDirective,
          "line " + std::to_string(d->line) + ": unknown flip feature '" +
              d->args + "'");
    }
  }
  std::set<std::string> paired;
  for (const char* name : {"locus", "paired"}) {
    for (const Directive* d : g.directives_named(name)) {
      std::istringstream args(d->args);
      std::string cat;
      while (args >> cat) {
        if (!alternatives.count(cat)) {
          add(Diagnostic::Kind::kBadDirective,
              "line " + std::to_string(d->line) + ": %" + name +
                  " names undefined category " + cat);
        }
        paired.insert(cat);
      }
    }
  }
  for (const auto& e : g.lexicon) {
    if (!paired.count(e.category)) continue;
    if (!e.features.has(flip)) {
      add(Diagnostic::Kind::kUnpairedLemma,
          "entry '" + e.surface + "' of " + e.category + " has no " +
              std::string(to_string(flip)) + " feature");
      continue;
    }
    auto counterpart = flip_feature(e.features, flip);
    if (!counterpart) continue;
    if (!g.find_entry(e.lemma, e.category, *counterpart)) {
      add(Diagnostic::Kind::kUnpairedLemma,
          "unpaired lemma " + e.lemma + ": " + e.category +
              to_string(e.features) + " '" + e.surface + "' has no " +
              to_string(*counterpart) + " form");
    }
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace agreebench
