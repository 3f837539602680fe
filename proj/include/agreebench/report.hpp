#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "agreebench/evaluator.hpp"

namespace agreebench {

enum class ReportFormat { kJson, kTsv, kMarkdown };

std::string_view to_string(ReportFormat f);
std::optional<ReportFormat> parse_report_format(std::string_view s);

std::string render_report(const EvaluationReport& report, ReportFormat format);

// Inverse of the json and tsv renderings. Throws FormatError.
EvaluationReport parse_report_json(std::string_view text);
EvaluationReport parse_report_tsv(std::string_view text);
// Picks the parser from the first non-blank character.
EvaluationReport parse_report(std::string_view text);

}  // namespace agreebench
