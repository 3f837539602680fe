#include "agreebench/tokenizer.hpp"

#include <fstream>

#include "agreebench/error.hpp"

namespace agreebench {

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t begin = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > begin) out.emplace_back(text.substr(begin, i - begin));
  }
  return out;
}

std::uint32_t WordVocab::intern(const std::string& word) {
  auto [it, inserted] =
      ids_.emplace(word, static_cast<std::uint32_t>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

std::optional<std::uint32_t> WordVocab::find(const std::string& word) const {
  auto it = ids_.find(word);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenSequence whitespace_tokenize(std::string_view text, WordVocab& vocab) {
  TokenSequence out;
  out.tokens = split_whitespace(text);
  if (out.tokens.empty()) throw Error("cannot tokenize an empty sentence");
  out.ids.reserve(out.tokens.size());
  for (const auto& t : out.tokens) out.ids.push_back(vocab.intern(t));
  return out;
}

SubwordVocab::SubwordVocab(std::vector<std::string> entries,
                           std::string unknown)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!ids_.emplace(entries_[i], static_cast<std::uint32_t>(i)).second)
      throw Error("duplicate vocabulary entry '" + entries_[i] + "' at line " +
                  std::to_string(i + 1));
  }
  auto it = ids_.find(unknown);
  if (it == ids_.end())
    throw Error("vocabulary has no unknown-token entry '" + unknown + "'");
  unknown_id_ = it->second;
}

SubwordVocab SubwordVocab::load(const std::filesystem::path& path,
                                std::string unknown) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vocabulary " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    entries.push_back(line);
  }
  return SubwordVocab(std::move(entries), std::move(unknown));
}

std::optional<std::uint32_t> SubwordVocab::id(std::string_view piece) const {
  auto it = ids_.find(std::string(piece));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> utf8_boundaries(std::string_view s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto byte = static_cast<unsigned char>(s[i]);
    if ((byte & 0xC0) != 0x80) out.push_back(i);
  }
  out.push_back(s.size());
  return out;
}

std::vector<std::string> wordpiece(std::string_view word,
                                   const SubwordVocab& vocab) {
  auto bounds = utf8_boundaries(word);
  std::size_t chars = bounds.size() - 1;
  if (chars == 0) return {};
  if (chars > kMaxWordChars) return {vocab.unknown()};

  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < chars) {
    std::size_t end = chars;
    std::optional<std::string> match;
    for (; end > start; --end) {
      std::string candidate(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (start > 0) candidate.insert(0, kContinuationMarker);
      if (vocab.id(candidate)) {
        match = std::move(candidate);
        break;
      }
    }
    if (!match) return {vocab.unknown()};
    pieces.push_back(std::move(*match));
    start = end;
  }
  return pieces;
}

TokenSequence subword_tokenize(std::string_view text, const SubwordVocab& vocab) {
  TokenSequence out;
  for (const auto& word : split_whitespace(text)) {
    for (auto& piece : wordpiece(word, vocab)) {
      out.ids.push_back(*vocab.id(piece));
      out.tokens.push_back(std::move(piece));
    }
  }
  if (out.tokens.empty()) throw Error("cannot tokenize an empty sentence");
  return out;
}

GateResult length_gate(std::size_t len_grammatical,
                       std::size_t len_ungrammatical) {
  GateResult r;
  r.len_grammatical = len_grammatical;
  r.len_ungrammatical = len_ungrammatical;
  if (len_grammatical != len_ungrammatical) {
    r.verdict = GateResult::Verdict::kDiscard;
    r.reason = "token counts differ: " + std::to_string(len_grammatical) +
               " vs " + std::to_string(len_ungrammatical);
  }
  return r;
}

GateResult length_gate(std::optional<std::size_t> len_grammatical,
                       std::optional<std::size_t> len_ungrammatical) {
  if (!len_grammatical || !len_ungrammatical)
    throw ScoringError("length gate needs token counts for both sentences");
  return length_gate(*len_grammatical, *len_ungrammatical);
}

GateResult length_gate(const MinimalPair& pair, const TokenCounter& count) {
  return length_gate(count(join_tokens(pair.grammatical)),
                     count(join_tokens(pair.ungrammatical)));
}

TokenCounter whitespace_counter() {
  return [](std::string_view text) { return split_whitespace(text).size(); };
}

TokenCounter subword_counter(const SubwordVocab& vocab) {
  return [&vocab](std::string_view text) {
    return subword_tokenize(text, vocab).size();
  };
}

}  // namespace agreebench
