#include <gtest/gtest.h>

#include <json.hpp>

#include "support.hpp"

using namespace testing_support;

namespace {

std::string cli(const std::string& args) { return sh_quote(cli_path()) + " " + args; }

std::string grammars() { return "--grammar-dir " + sh_quote(grammar_dir().string()); }

// Generates the shipped corpus once per scratch directory.
std::filesystem::path corpus(const std::string& name) {
  auto dir = scratch_dir(name);
  auto pairs = dir / "pairs.jsonl";
  EXPECT_EQ(run(cli("generate " + grammars() + " --pairs " + sh_quote(pairs.string())) +
                " 2>/dev/null"),
            0);
  return pairs;
}

}  // namespace

TEST(Cli, GenerateTwiceIsByteIdentical) {
  auto a = corpus("cli_gen_a");
  auto b = corpus("cli_gen_b");
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(read_file(a.string() + ".manifest.json"), read_file(b.string() + ".manifest.json"));
  EXPECT_EQ(read_file(a.string() + ".manifest.json"), read_file(grammar_dir() / "manifest.json"));
}

TEST(Cli, ValidateShippedGrammars) {
  EXPECT_EQ(run(cli("validate " + grammars() + " --manifest " +
                    sh_quote((grammar_dir() / "manifest.json").string())) +
                " >/dev/null"),
            0);
}

TEST(Cli, ValidateReportsBrokenGrammar) {
  auto dir = scratch_dir("cli_broken");
  write_file(dir / "bad.cfg", "S -> NP 'lacht'\nNP -> NP 'und' NP | 'Er'\n");
  auto err = dir / "err.txt";
  EXPECT_EQ(run(cli("validate --grammar-dir " + sh_quote(dir.string())) + " >/dev/null 2>" +
                sh_quote(err.string())),
            1);
  EXPECT_NE(read_file(err).find("bad.cfg: cycle"), std::string::npos);
}

TEST(Cli, OracleEndToEnd) {
  auto pairs = corpus("cli_oracle");
  auto dir = pairs.parent_path();
  auto report = dir / "report.json";
  auto audit = dir / "audit.jsonl";
  ASSERT_EQ(run(cli("evaluate --backend oracle --pairs " + sh_quote(pairs.string()) + " --out " +
                    sh_quote(report.string()) + " --audit " + sh_quote(audit.string()))),
            0);
  auto md = dir / "report.md";
  ASSERT_EQ(run(cli("report " + sh_quote(report.string()) + " --format markdown --out " +
                    sh_quote(md.string()))),
            0);
  auto text = read_file(md);
  EXPECT_NE(text.find("| Simple Sentence | 1.0000 | 69 |"), std::string::npos);
  EXPECT_NE(text.find("| Case agreement | 1.0000 | 648 |"), std::string::npos);
  EXPECT_EQ(text.find("| 0."), std::string::npos);

  auto j = nlohmann::json::parse(read_file(report));
  EXPECT_EQ(j["config"]["pairs_sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(j["config"]["backend"], "oracle");
  std::size_t lines = 0;
  for (char c : read_file(audit)) lines += c == '\n';
  EXPECT_EQ(lines, 13002u);
}

TEST(Cli, ExternThroughStub) {
  auto pairs = corpus("cli_extern");
  auto report = pairs.parent_path() / "report.tsv";
  std::string cmd = sh_quote(stub_path()) + " --backend uniform --threads 3";
  ASSERT_EQ(run(cli("evaluate --backend extern --jobs 3 --format tsv --pairs " +
                    sh_quote(pairs.string()) + " --extern-cmd " + sh_quote(cmd) + " --out " +
                    sh_quote(report.string()))),
            0);
  EXPECT_NE(read_file(report).find("coarse\tsimple_sentence\t\t69\t0\t0\t69\t0\t0"),
            std::string::npos);
}

TEST(Cli, TransportFailureExitsThree) {
  auto pairs = corpus("cli_transport");
  auto dir = pairs.parent_path();
  std::string cmd = sh_quote(stub_path()) + " --backend uniform --die-after 10";
  auto report = dir / "partial.json";
  EXPECT_EQ(run(cli("evaluate --backend extern --pairs " + sh_quote(pairs.string()) +
                    " --extern-cmd " + sh_quote(cmd) + " --out " + sh_quote(report.string())) +
                " 2>/dev/null"),
            3);
  auto j = nlohmann::json::parse(read_file(report));
  EXPECT_TRUE(j["incomplete"].get<bool>());
  EXPECT_EQ(run(cli("evaluate --backend extern --pairs " + sh_quote(pairs.string()) +
                    " --extern-addr unix:/nonexistent/sock") +
                " >/dev/null 2>&1"),
            3);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(cli("") + " >/dev/null 2>&1"), 2);
  EXPECT_EQ(run(cli("frobnicate") + " >/dev/null 2>&1"), 2);
  EXPECT_EQ(run(cli("evaluate --backend nonsense") + " >/dev/null 2>&1"), 2);
  EXPECT_EQ(run(cli("evaluate --jobs many") + " >/dev/null 2>&1"), 2);
  auto pairs = corpus("cli_usage");
  EXPECT_EQ(run(cli("evaluate --backend extern --pairs " + sh_quote(pairs.string())) +
                " >/dev/null 2>&1"),
            2);
  EXPECT_EQ(run(cli("evaluate --gate subword --pairs " + sh_quote(pairs.string())) +
                " >/dev/null 2>&1"),
            2);
  EXPECT_EQ(run(cli("--help") + " >/dev/null 2>&1"), 0);
}

TEST(Cli, BadPairFileExitsOne) {
  auto dir = scratch_dir("cli_badpairs");
  write_file(dir / "pairs.jsonl", "{\"not\":\"a manifest\"}\n");
  EXPECT_EQ(run(cli("evaluate --pairs " + sh_quote((dir / "pairs.jsonl").string())) +
                " >/dev/null 2>&1"),
            1);
  EXPECT_EQ(run(cli("evaluate --pairs " + sh_quote((dir / "missing.jsonl").string())) +
                " >/dev/null 2>&1"),
            1);
}

TEST(Cli, EnvironmentDefaultsAndFlagsWin) {
  auto pairs = corpus("cli_env");
  auto dir = pairs.parent_path();
  auto a = dir / "a.json", b = dir / "b.json";
  std::string env = "AGREEBENCH_PAIRS=" + sh_quote(pairs.string()) + " AGREEBENCH_BACKEND=uniform ";
  ASSERT_EQ(run(env + cli("evaluate --out " + sh_quote(a.string()))), 0);
  EXPECT_EQ(nlohmann::json::parse(read_file(a))["backend"], "uniform");
  ASSERT_EQ(run(env + cli("evaluate --backend oracle --out " + sh_quote(b.string()))), 0);
  EXPECT_EQ(nlohmann::json::parse(read_file(b))["backend"], "oracle");
}

TEST(Cli, StatsMentionReferenceFigures) {
  auto pairs = corpus("cli_stats");
  auto out = pairs.parent_path() / "stats.txt";
  ASSERT_EQ(run(cli("stats " + grammars() + " --pairs " + sh_quote(pairs.string()) + " --out " +
                    sh_quote(out.string()))),
            0);
  auto text = read_file(out);
  EXPECT_NE(text.find("pairs: 13002"), std::string::npos);
  EXPECT_NE(text.find("mean tokens per sentence:"), std::string::npos);
  EXPECT_NE(text.find("reference 6.88"), std::string::npos);
  EXPECT_NE(text.find("lexemes:"), std::string::npos);
}

TEST(Cli, ReportConvertsBetweenFormats) {
  auto pairs = corpus("cli_convert");
  auto dir = pairs.parent_path();
  auto json = dir / "r.json", tsv = dir / "r.tsv", back = dir / "back.json";
  ASSERT_EQ(run(cli("evaluate --backend random --seed 42 --timestamp T --pairs " +
                    sh_quote(pairs.string()) + " --out " + sh_quote(json.string()))),
            0);
  ASSERT_EQ(run(cli("report " + sh_quote(json.string()) + " --format tsv --out " + sh_quote(tsv.string()))), 0);
  ASSERT_EQ(run(cli("report " + sh_quote(tsv.string()) + " --format json --out " + sh_quote(back.string()))), 0);
  EXPECT_EQ(read_file(json), read_file(back));
}
