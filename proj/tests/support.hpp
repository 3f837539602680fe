#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "agreebench/grammar.hpp"
#include "agreebench/pairfile.hpp"
#include "agreebench/pairgen.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return AGREEBENCH_SOURCE_DIR; }
inline std::filesystem::path grammar_dir() { return source_dir() / "grammars"; }
inline std::filesystem::path data_dir() { return source_dir() / "tests" / "data"; }
inline std::string cli_path() { return AGREEBENCH_CLI; }
inline std::string stub_path() { return AGREEBENCH_STUB; }

inline const std::vector<agreebench::CaseGrammar>& shipped_grammars() {
  static const auto grammars = agreebench::load_case_grammars(grammar_dir());
  return grammars;
}

inline const std::vector<agreebench::MinimalPair>& shipped_pairs() {
  static const auto pairs = agreebench::generate_corpus(shipped_grammars());
  return pairs;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// A fresh directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(AGREEBENCH_BINARY_DIR) / "scratch" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Exit status of a shell command.
inline int run(const std::string& command) {
  int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

inline std::string sh_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

}  // namespace testing_support
