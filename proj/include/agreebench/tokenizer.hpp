#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agreebench/pairgen.hpp"

namespace agreebench {

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<std::uint32_t> ids;

  std::size_t size() const { return tokens.size(); }
};

std::vector<std::string> split_whitespace(std::string_view text);

// Corpus-local word ids, assigned in order of first appearance.
class WordVocab {
 public:
  std::uint32_t intern(const std::string& word);
  std::optional<std::uint32_t> find(const std::string& word) const;
  std::size_t size() const { return words_.size(); }
  const std::string& word(std::uint32_t id) const { return words_.at(id); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> words_;
};

// Splits on runs of spaces. Throws Error on empty input.
TokenSequence whitespace_tokenize(std::string_view text, WordVocab& vocab);

inline constexpr std::size_t kMaxWordChars = 100;
inline constexpr std::string_view kContinuationMarker = "##";

// Sub-word inventory; the id of a piece is its line number in the vocab file.
class SubwordVocab {
 public:
  // Throws Error on duplicate entries or when `unknown` is absent.
  explicit SubwordVocab(std::vector<std::string> entries,
                        std::string unknown = "[UNK]");
  static SubwordVocab load(const std::filesystem::path& path,
                           std::string unknown = "[UNK]");

  std::size_t size() const { return entries_.size(); }
  std::optional<std::uint32_t> id(std::string_view piece) const;
  const std::string& piece(std::uint32_t id) const { return entries_.at(id); }
  std::uint32_t unknown_id() const { return unknown_id_; }
  const std::string& unknown() const { return entries_[unknown_id_]; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::uint32_t unknown_id_ = 0;
};

// Greedy longest-match-first segmentation of one word. Words longer than
// kMaxWordChars code points, or with an unmatched remainder, become a single
// unknown piece.
std::vector<std::string> wordpiece(std::string_view word,
                                   const SubwordVocab& vocab);

TokenSequence subword_tokenize(std::string_view text, const SubwordVocab& vocab);

// Byte offsets of the UTF-8 code point starts of `s`, plus s.size().
std::vector<std::size_t> utf8_boundaries(std::string_view s);

struct GateResult {
  enum class Verdict { kKeep, kDiscard };
  Verdict verdict = Verdict::kKeep;
  std::string reason;
  std::size_t len_grammatical = 0;
  std::size_t len_ungrammatical = 0;

  bool keep() const { return verdict == Verdict::kKeep; }
};

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Keep iff both sentences have the same total token count.
GateResult length_gate(std::size_t len_grammatical,
                       std::size_t len_ungrammatical);
// Counts reported by an external scorer; throws ScoringError when missing.
GateResult length_gate(std::optional<std::size_t> len_grammatical,
                       std::optional<std::size_t> len_ungrammatical);
GateResult length_gate(const MinimalPair& pair, const TokenCounter& count);

TokenCounter whitespace_counter();
TokenCounter subword_counter(const SubwordVocab& vocab);

}  // namespace agreebench
