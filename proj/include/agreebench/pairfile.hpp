#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "agreebench/pairgen.hpp"

namespace agreebench {

inline constexpr int kPairFormatVersion = 1;

struct PhenomenonManifest {
  std::size_t total = 0;
  std::map<std::string, std::size_t> conditions;
  std::string grammar_file;
  std::string grammar_sha256;
  std::vector<std::string> notes;

  friend bool operator==(const PhenomenonManifest&,
                         const PhenomenonManifest&) = default;
};

struct Manifest {
  int format_version = kPairFormatVersion;
  // Keyed by phenomenon id.
  std::map<std::string, PhenomenonManifest> phenomena;
  std::size_t total = 0;
  // Over the pair records exactly as written, one per line.
  std::string pairs_sha256;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct GrammarSource {
  std::string file;
  std::string sha256;
  std::vector<std::string> notes;
};

using GrammarSources = std::map<Phenomenon, GrammarSource>;

GrammarSources sources_of(const std::vector<CaseGrammar>& grammars);

// Counts and checksums for `pairs`; every phenomenon in `sources` is listed
// even when it produced nothing.
Manifest build_manifest(const std::vector<MinimalPair>& pairs,
                        const GrammarSources& sources = {});

std::string manifest_to_json(const Manifest& m, int indent = -1);
Manifest manifest_from_json(std::string_view text);
Manifest load_manifest(const std::filesystem::path& path);

// Human-readable differences, empty when equal.
std::vector<std::string> compare_manifests(const Manifest& expected,
                                           const Manifest& actual);

// One JSON object: {id, phenomenon, condition, grammatical, ungrammatical,
// locus_index}. Sentences are single-space token joins.
std::string pair_record(const MinimalPair& pair);

// Leading manifest record, then one record per pair.
void write_pairs(std::ostream& out, const std::vector<MinimalPair>& pairs,
                 const GrammarSources& sources = {});
void write_pairs_file(const std::filesystem::path& path,
                      const std::vector<MinimalPair>& pairs,
                      const GrammarSources& sources = {});

struct PairFile {
  Manifest manifest;
  std::vector<MinimalPair> pairs;
};

// Strict mode additionally checks the single-locus invariant of every pair,
// the manifest counts and the record checksum. Throws FormatError with the
// offending line number.
PairFile read_pairs(std::istream& in, bool strict);
PairFile read_pairs_file(const std::filesystem::path& path, bool strict);

// Every generated pair of every grammar in `grammars`, in phenomenon order.
std::vector<MinimalPair> generate_corpus(const std::vector<CaseGrammar>& grammars);

}  // namespace agreebench
