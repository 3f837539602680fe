#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>
#include <unordered_set>

#include "agreebench/error.hpp"
#include "agreebench/report.hpp"
#include "support.hpp"

using namespace agreebench;
using testing_support::shipped_pairs;

namespace {

EvaluationReport sample_report() {
  auto random = make_random_backend(42);
  EvaluationConfig c;
  c.timestamp = "2000-01-01T00:00:00Z";
  c.echo["note"] = "tab\there \"quoted\"";
  auto r = evaluate_pairs(shipped_pairs(), *random, c);
  return r;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

}  // namespace

TEST(Report, MarkdownHasFourteenRowsInTwoSections) {
  auto md = render_report(sample_report(), ReportFormat::kMarkdown);
  auto first_table = md.substr(0, md.find("\n\n", md.find("| Test case")));
  EXPECT_EQ(count(first_table, "| **Subject-verb agreement** |"), 1u);
  EXPECT_EQ(count(first_table, "| **Reflexive anaphora** |"), 1u);
  std::size_t rows = 0;
  for (auto p : kAllPhenomena)
    rows += count(first_table, "| " + std::string(display_name(p)) + " |");
  EXPECT_EQ(rows, 14u);
  EXPECT_LT(first_table.find("Subject-verb"), first_table.find("Pre-field"));
  EXPECT_LT(first_table.find("Pre-field"), first_table.find("Reflexive anaphora"));
  EXPECT_LT(first_table.find("Reflexive anaphora"), first_table.find("Case agreement"));
}

TEST(Report, MarkdownFineTableForMediumVp) {
  auto md = render_report(sample_report(), ReportFormat::kMarkdown);
  auto start = md.find("| *Medium VP coordination* |");
  ASSERT_NE(start, std::string::npos);
  auto block = md.substr(start, md.find("| *Long VP", start) - start);
  for (auto c : {"-sgsg", "-plpl", "-sgpl", "-plsg"}) EXPECT_EQ(count(block, std::string("| ") + c + " |"), 1u) << c;
  EXPECT_LT(block.find("-sgsg"), block.find("-plpl"));
  EXPECT_LT(block.find("-plpl"), block.find("-sgpl"));
  EXPECT_LT(block.find("-sgpl"), block.find("-plsg"));
}

TEST(Report, MarkdownShowsNullAccuracy) {
  auto oracle = make_oracle_backend({});
  EvaluationConfig c;
  c.timestamp = "t";
  auto md = render_report(evaluate_pairs({}, *oracle, c), ReportFormat::kMarkdown);
  EXPECT_NE(md.find("| Simple Sentence | n/a | 0 |"), std::string::npos);
}

TEST(Report, JsonRoundTrip) {
  auto r = sample_report();
  EXPECT_EQ(parse_report_json(render_report(r, ReportFormat::kJson)), r);
}

TEST(Report, TsvRoundTrip) {
  auto r = sample_report();
  EXPECT_EQ(parse_report_tsv(render_report(r, ReportFormat::kTsv)), r);
}

TEST(Report, JsonTsvJson) {
  auto r = sample_report();
  auto json = render_report(r, ReportFormat::kJson);
  auto tsv = render_report(parse_report(json), ReportFormat::kTsv);
  EXPECT_EQ(render_report(parse_report(tsv), ReportFormat::kJson), json);
}

TEST(Report, JsonKeysAreSorted) {
  auto j = nlohmann::json::parse(render_report(sample_report(), ReportFormat::kJson));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_TRUE(j["coarse"][0]["accuracy"].is_number());
}

TEST(Report, IncompleteFlagSurvives) {
  auto r = sample_report();
  r.incomplete = true;
  r.error = "scorer closed the connection";
  EXPECT_EQ(parse_report(render_report(r, ReportFormat::kTsv)), r);
  EXPECT_EQ(parse_report(render_report(r, ReportFormat::kJson)), r);
  EXPECT_NE(render_report(r, ReportFormat::kMarkdown).find("Incomplete"), std::string::npos);
}

TEST(Report, MalformedInput) {
  EXPECT_THROW(parse_report_json("[]"), FormatError);
  EXPECT_THROW(parse_report_json("{\"backend\": 1}"), FormatError);
  EXPECT_THROW(parse_report_tsv("no header\n"), FormatError);
  auto tsv = render_report(sample_report(), ReportFormat::kTsv);
  auto broken = tsv;
  std::string row = "coarse\tsimple_sentence\t\t69";
  broken.replace(broken.find(row), row.size(), "coarse\tsimple_sentence\t\t70");
  EXPECT_THROW(parse_report_tsv(broken), FormatError);
}

TEST(Report, FormatNames) {
  EXPECT_EQ(parse_report_format("markdown"), ReportFormat::kMarkdown);
  EXPECT_EQ(parse_report_format("md"), ReportFormat::kMarkdown);
  EXPECT_FALSE(parse_report_format("html"));
}
