#include "agreebench/report.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "agreebench/error.hpp"

namespace agreebench {

using json = nlohmann::json;

std::string_view to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::kJson: return "json";
    case ReportFormat::kTsv: return "tsv";
    case ReportFormat::kMarkdown: return "markdown";
  }
  return "?";
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  for (auto f : {ReportFormat::kJson, ReportFormat::kTsv, ReportFormat::kMarkdown})
    if (to_string(f) == s) return f;
  if (s == "md") return ReportFormat::kMarkdown;
  return std::nullopt;
}

namespace {

json row_json(const CategoryResult& r) {
  auto acc = r.accuracy();
  return {{"phenomenon", id(r.phenomenon)},
          {"condition", r.condition ? json(*r.condition) : json(nullptr)},
          {"n_total", r.n_total},
          {"n_correct", r.n_correct},
          {"n_incorrect", r.n_incorrect},
          {"n_tie", r.n_tie},
          {"n_discarded", r.n_discarded},
          {"accuracy", acc ? json(*acc) : json(nullptr)}};
}

CategoryResult row_from_json(const json& j) {
  CategoryResult r;
  auto p = parse_phenomenon(j.at("phenomenon").get<std::string>());
  if (!p) throw FormatError("unknown phenomenon " + j.at("phenomenon").dump());
  r.phenomenon = *p;
  if (!j.at("condition").is_null()) r.condition = j["condition"].get<std::string>();
  r.n_total = j.at("n_total").get<std::size_t>();
  r.n_correct = j.at("n_correct").get<std::size_t>();
  r.n_incorrect = j.at("n_incorrect").get<std::size_t>();
  r.n_tie = j.at("n_tie").get<std::size_t>();
  r.n_discarded = j.at("n_discarded").get<std::size_t>();
  if (r.n_correct + r.n_incorrect + r.n_tie + r.n_discarded != r.n_total)
    throw FormatError("row counts of " + std::string(id(r.phenomenon)) +
                      " do not add up");
  return r;
}

std::string accuracy_text(const CategoryResult& r) {
  auto acc = r.accuracy();
  if (!acc) return "n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.4f", *acc);
  return buf;
}

std::string render_json(const EvaluationReport& report) {
  json j;
  j["backend"] = report.backend;
  j["timestamp"] = report.timestamp;
  j["config"] = report.config;
  j["incomplete"] = report.incomplete;
  j["error"] = report.error.empty() ? json(nullptr) : json(report.error);
  j["coarse"] = json::array();
  for (const auto& r : report.coarse) j["coarse"].push_back(row_json(r));
  j["fine"] = json::array();
  for (const auto& r : report.fine) j["fine"].push_back(row_json(r));
  return j.dump(2) + "\n";
}

const char* kTsvHeader =
    "level\tphenomenon\tcondition\tn_total\tn_correct\tn_incorrect\tn_tie\t"
    "n_discarded\taccuracy";

std::string render_tsv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "#\tbackend\t" << json(report.backend).dump() << '\n';
  out << "#\ttimestamp\t" << json(report.timestamp).dump() << '\n';
  out << "#\tconfig\t" << json(report.config).dump() << '\n';
  out << "#\tincomplete\t" << json(report.incomplete).dump() << '\n';
  if (!report.error.empty()) out << "#\terror\t" << json(report.error).dump() << '\n';
  out << kTsvHeader << '\n';
  auto row = [&](const char* level, const CategoryResult& r) {
    auto acc = r.accuracy();
    out << level << '\t' << id(r.phenomenon) << '\t'
        << (r.condition ? *r.condition : "") << '\t' << r.n_total << '\t'
        << r.n_correct << '\t' << r.n_incorrect << '\t' << r.n_tie << '\t'
        << r.n_discarded << '\t' << (acc ? json(*acc).dump() : "") << '\n';
  };
  for (const auto& r : report.coarse) row("coarse", r);
  for (const auto& r : report.fine) row("fine", r);
  return out.str();
}

std::string render_markdown(const EvaluationReport& report) {
  std::ostringstream out;
  out << "Backend: " << report.backend << "  \n";
  out << "Timestamp: " << report.timestamp << "  \n";
  for (const auto& [k, v] : report.config) out << k << ": " << v << "  \n";
  if (report.incomplete) out << "**Incomplete run:** " << report.error << "  \n";
  out << "\n| Test case | Accuracy | # sents |\n|---|---:|---:|\n";
  bool reflexive_seen = false;
  out << "| **Subject-verb agreement** | | |\n";
  for (const auto& r : report.coarse) {
    if (is_reflexive(r.phenomenon) && !reflexive_seen) {
      out << "| **Reflexive anaphora** | | |\n";
      reflexive_seen = true;
    }
    out << "| " << display_name(r.phenomenon) << " | " << accuracy_text(r)
        << " | " << r.n_total << " |\n";
  }

  out << "\n| Test case | Accuracy | # sents |\n|---|---:|---:|\n";
  reflexive_seen = false;
  out << "| **Subject-verb agreement** | | |\n";
  for (auto p : kAllPhenomena) {
    auto rows = report.fine_rows(p);
    if (rows.empty()) continue;
    if (is_reflexive(p) && !reflexive_seen) {
      out << "| **Reflexive anaphora** | | |\n";
      reflexive_seen = true;
    }
    out << "| *" << display_name(p) << "* | | |\n";
    for (const auto& r : rows)
      out << "| -" << *r.condition << " | " << accuracy_text(r) << " | "
          << r.n_total << " |\n";
  }

  std::size_t ties = 0, discarded = 0;
  for (const auto& r : report.coarse) {
    ties += r.n_tie;
    discarded += r.n_discarded;
  }
  out << "\nTies: " << ties << ", discarded: " << discarded << "\n";
  return out.str();
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace

std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: return render_json(report);
    case ReportFormat::kTsv: return render_tsv(report);
    case ReportFormat::kMarkdown: return render_markdown(report);
  }
  return {};
}

EvaluationReport parse_report_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("report is not a JSON object");
  try {
    EvaluationReport r;
    r.backend = j.at("backend").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    r.incomplete = j.at("incomplete").get<bool>();
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
    for (const auto& row : j.at("coarse")) r.coarse.push_back(row_from_json(row));
    for (const auto& row : j.at("fine")) r.fine.push_back(row_from_json(row));
    if (r.coarse.size() != kAllPhenomena.size())
      throw FormatError("report has " + std::to_string(r.coarse.size()) +
                        " coarse rows");
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

EvaluationReport parse_report_tsv(std::string_view text) {
  EvaluationReport r;
  std::size_t line_no = 0;
  bool header = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line, '\t');
    try {
      if (cells[0] == "#") {
        if (cells.size() != 3) throw FormatError("bad metadata line", line_no);
        json v = json::parse(cells[2]);
        if (cells[1] == "backend") r.backend = v.get<std::string>();
        else if (cells[1] == "timestamp") r.timestamp = v.get<std::string>();
        else if (cells[1] == "config") r.config = v.get<std::map<std::string, std::string>>();
        else if (cells[1] == "incomplete") r.incomplete = v.get<bool>();
        else if (cells[1] == "error") r.error = v.get<std::string>();
        continue;
      }
      if (!header) {
        if (line != kTsvHeader) throw FormatError("missing tsv header", line_no);
        header = true;
        continue;
      }
      if (cells.size() != 9) throw FormatError("expected 9 columns", line_no);
      json row = {{"phenomenon", cells[1]},
                  {"condition", cells[0] == "coarse" ? json(nullptr) : json(cells[2])},
                  {"n_total", std::stoull(cells[3])},
                  {"n_correct", std::stoull(cells[4])},
                  {"n_incorrect", std::stoull(cells[5])},
                  {"n_tie", std::stoull(cells[6])},
                  {"n_discarded", std::stoull(cells[7])}};
      auto parsed = row_from_json(row);
      if (cells[0] == "coarse") r.coarse.push_back(parsed);
      else if (cells[0] == "fine") r.fine.push_back(parsed);
      else throw FormatError("unknown level '" + cells[0] + "'", line_no);
    } catch (const FormatError& e) {
      if (e.line()) throw;
      throw FormatError(e.what(), line_no);
    } catch (const std::exception& e) {
      throw FormatError(e.what(), line_no);
    }
  }
  if (r.coarse.size() != kAllPhenomena.size())
    throw FormatError("report has " + std::to_string(r.coarse.size()) + " coarse rows");
  return r;
}

EvaluationReport parse_report(std::string_view text) {
  auto pos = text.find_first_not_of(" \t\r\n");
  if (pos != std::string_view::npos && text[pos] == '{') return parse_report_json(text);
  return parse_report_tsv(text);
}

}  // namespace agreebench
