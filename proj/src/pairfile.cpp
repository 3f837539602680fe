#include "agreebench/pairfile.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "agreebench/checksum.hpp"
#include "agreebench/error.hpp"

namespace agreebench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

json to_json(const Manifest& m) {
  json j;
  j["record"] = "manifest";
  j["format_version"] = m.format_version;
  j["total"] = m.total;
  j["pairs_sha256"] = m.pairs_sha256;
  json phenomena = json::object();
  for (const auto& [name, p] : m.phenomena) {
    json entry;
    entry["total"] = p.total;
    entry["conditions"] = p.conditions;
    entry["grammar"] = p.grammar_file;
    entry["grammar_sha256"] = p.grammar_sha256;
    entry["notes"] = p.notes;
    phenomena[name] = std::move(entry);
  }
  j["phenomena"] = std::move(phenomena);
  return j;
}

Manifest from_json(const json& j) {
  if (!j.is_object() || j.value("record", "") != "manifest")
    throw FormatError("not a manifest record");
  Manifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kPairFormatVersion)
    throw FormatError("unsupported pair format version " +
                      std::to_string(m.format_version));
  m.total = j.at("total").get<std::size_t>();
  m.pairs_sha256 = j.value("pairs_sha256", "");
  for (const auto& [name, entry] : j.at("phenomena").items()) {
    PhenomenonManifest p;
    p.total = entry.at("total").get<std::size_t>();
    p.conditions =
        entry.at("conditions").get<std::map<std::string, std::size_t>>();
    p.grammar_file = entry.value("grammar", "");
    p.grammar_sha256 = entry.value("grammar_sha256", "");
    p.notes = entry.value("notes", std::vector<std::string>{});
    m.phenomena[name] = std::move(p);
  }
  return m;
}

MinimalPair pair_from_json(const json& j, std::size_t line) {
  try {
    MinimalPair p;
    p.id = j.at("id").get<std::string>();
    auto name = j.at("phenomenon").get<std::string>();
    auto phenomenon = parse_phenomenon(name);
    if (!phenomenon) throw FormatError("unknown phenomenon '" + name + "'", line);
    p.phenomenon = *phenomenon;
    p.condition = j.at("condition").get<std::string>();
    p.grammatical = split_tokens(j.at("grammatical").get<std::string>());
    p.ungrammatical = split_tokens(j.at("ungrammatical").get<std::string>());
    p.locus_index = j.at("locus_index").get<std::size_t>();
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed pair record: ") + e.what(), line);
  }
}

void check_single_locus(const MinimalPair& p, std::size_t line) {
  if (p.grammatical.empty())
    throw FormatError("pair " + p.id + " has an empty sentence", line);
  if (p.grammatical.size() != p.ungrammatical.size())
    throw FormatError("pair " + p.id + " has sentences of different length",
                      line);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < p.grammatical.size(); ++i)
    if (p.grammatical[i] != p.ungrammatical[i]) ++differing;
  if (differing != 1 || p.locus_index >= p.grammatical.size() ||
      p.grammatical[p.locus_index] == p.ungrammatical[p.locus_index]) {
    throw FormatError("pair " + p.id + " differs at " +
                          std::to_string(differing) +
                          " positions, expected exactly its locus " +
                          std::to_string(p.locus_index),
                      line);
  }
}

}  // namespace

GrammarSources sources_of(const std::vector<CaseGrammar>& grammars) {
  GrammarSources out;
  for (const auto& g : grammars)
    out[g.spec.phenomenon] = {g.path.filename().string(), g.sha256, g.spec.notes};
  return out;
}

Manifest build_manifest(const std::vector<MinimalPair>& pairs,
                        const GrammarSources& sources) {
  Manifest m;
  for (const auto& [phenomenon, source] : sources) {
    auto& entry = m.phenomena[std::string(id(phenomenon))];
    entry.grammar_file = source.file;
    entry.grammar_sha256 = source.sha256;
    entry.notes = source.notes;
  }
  std::string records;
  for (const auto& p : pairs) {
    auto& entry = m.phenomena[std::string(id(p.phenomenon))];
    ++entry.total;
    ++entry.conditions[p.condition];
    ++m.total;
    records += pair_record(p);
    records += '\n';
  }
  m.pairs_sha256 = sha256_hex(records);
  return m;
}

std::string manifest_to_json(const Manifest& m, int indent) {
  return to_json(m).dump(indent);
}

Manifest manifest_from_json(std::string_view text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return manifest_from_json(buf.str());
}

std::vector<std::string> compare_manifests(const Manifest& expected,
                                           const Manifest& actual) {
  std::vector<std::string> out;
  if (expected.total != actual.total)
    out.push_back("total: expected " + std::to_string(expected.total) +
                  ", got " + std::to_string(actual.total));
  for (const auto& [name, e] : expected.phenomena) {
    auto it = actual.phenomena.find(name);
    if (it == actual.phenomena.end()) {
      out.push_back(name + ": missing");
      continue;
    }
    const auto& a = it->second;
    if (e.total != a.total)
      out.push_back(name + ": expected " + std::to_string(e.total) +
                    " pairs, got " + std::to_string(a.total));
    if (e.conditions != a.conditions)
      out.push_back(name + ": per-condition counts differ");
    if (e.grammar_sha256 != a.grammar_sha256)
      out.push_back(name + ": grammar checksum differs");
  }
  for (const auto& [name, a] : actual.phenomena)
    if (!expected.phenomena.count(name)) out.push_back(name + ": not in manifest");
  if (expected.pairs_sha256 != actual.pairs_sha256)
    out.push_back("pair records checksum differs");
  return out;
}

std::string pair_record(const MinimalPair& pair) {
  ordered_json j;
  j["id"] = pair.id;
  j["phenomenon"] = id(pair.phenomenon);
  j["condition"] = pair.condition;
  j["grammatical"] = join_tokens(pair.grammatical);
  j["ungrammatical"] = join_tokens(pair.ungrammatical);
  j["locus_index"] = pair.locus_index;
  return j.dump();
}

void write_pairs(std::ostream& out, const std::vector<MinimalPair>& pairs,
                 const GrammarSources& sources) {
  out << manifest_to_json(build_manifest(pairs, sources)) << '\n';
  for (const auto& p : pairs) out << pair_record(p) << '\n';
}

void write_pairs_file(const std::filesystem::path& path,
                      const std::vector<MinimalPair>& pairs,
                      const GrammarSources& sources) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_pairs(out, pairs, sources);
  if (!out) throw Error("write failed for " + path.string());
}

PairFile read_pairs(std::istream& in, bool strict) {
  PairFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_manifest = false;
  std::string records;
  std::map<std::string, PhenomenonManifest> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!have_manifest) {
      try {
        file.manifest = from_json(j);
      } catch (const FormatError& e) {
        throw FormatError(e.what(), line_no);
      } catch (const json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what(),
                          line_no);
      }
      have_manifest = true;
      continue;
    }
    MinimalPair p = pair_from_json(j, line_no);
    if (strict) {
      check_single_locus(p, line_no);
      records += line;
      records += '\n';
      auto& entry = seen[std::string(id(p.phenomenon))];
      ++entry.total;
      ++entry.conditions[p.condition];
    }
    file.pairs.push_back(std::move(p));
  }
  if (!have_manifest) throw FormatError("missing manifest record", 1);

  if (strict) {
    if (file.pairs.size() != file.manifest.total)
      throw FormatError("manifest lists " + std::to_string(file.manifest.total) +
                        " pairs, file has " + std::to_string(file.pairs.size()));
    for (const auto& [name, expected] : file.manifest.phenomena) {
      auto it = seen.find(name);
      std::size_t total = it == seen.end() ? 0 : it->second.total;
      if (total != expected.total ||
          (it != seen.end() && it->second.conditions != expected.conditions))
        throw FormatError("counts for " + name + " do not match the manifest");
    }
    for (const auto& [name, entry] : seen)
      if (!file.manifest.phenomena.count(name))
        throw FormatError("phenomenon " + name + " missing from the manifest");
    if (sha256_hex(records) != file.manifest.pairs_sha256)
      throw FormatError("pair records checksum does not match the manifest");
  }
  return file;
}

PairFile read_pairs_file(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open pair file " + path.string());
  return read_pairs(in, strict);
}

std::vector<MinimalPair> generate_corpus(
    const std::vector<CaseGrammar>& grammars) {
  std::vector<MinimalPair> out;
  for (const auto& g : grammars) {
    auto pairs = generate_pairs(g.spec);
    out.insert(out.end(), std::make_move_iterator(pairs.begin()),
               std::make_move_iterator(pairs.end()));
  }
  return out;
}

}  // namespace agreebench
