#include "agreebench/phenomenon.hpp"

namespace agreebench {

namespace {

struct Row {
  Phenomenon phenomenon;
  std::string_view id;
  std::string_view name;
};

constexpr std::array<Row, 14> kRows = {{
    {Phenomenon::kSimpleSentence, "simple_sentence", "Simple Sentence"},
    {Phenomenon::kInSententialComplement, "in_sentential_complement",
     "In a sentential complement"},
    {Phenomenon::kShortVpCoord, "short_vp_coord", "Short VP coordination"},
    {Phenomenon::kMediumVpCoord, "medium_vp_coord", "Medium VP coordination"},
    {Phenomenon::kLongVpCoord, "long_vp_coord", "Long VP coordination"},
    {Phenomenon::kAcrossPp, "across_pp", "Across a PP"},
    {Phenomenon::kAcrossSubjRel, "across_subj_rel",
     "Across a subject relative clause"},
    {Phenomenon::kAcrossObjRel, "across_obj_rel",
     "Across an object relative clause"},
    {Phenomenon::kInObjRel, "in_obj_rel", "In an object relative clause"},
    {Phenomenon::kSimpleModifier, "simple_modifier", "With a modifier"},
    {Phenomenon::kExtendedModifier, "extended_modifier",
     "With an extended modifier"},
    {Phenomenon::kPreField, "pre_field", "Pre-field"},
    {Phenomenon::kRaPersonNumber, "ra_person_number",
     "Person & number agreement"},
    {Phenomenon::kRaCase, "ra_case", "Case agreement"},
}};

}  // namespace

std::string_view id(Phenomenon p) { return kRows[static_cast<int>(p)].id; }

std::optional<Phenomenon> parse_phenomenon(std::string_view s) {
  for (const auto& row : kRows)
    if (row.id == s) return row.phenomenon;
  return std::nullopt;
}

std::string_view display_name(Phenomenon p) {
  return kRows[static_cast<int>(p)].name;
}

bool is_reflexive(Phenomenon p) {
  return p == Phenomenon::kRaPersonNumber || p == Phenomenon::kRaCase;
}

int condition_rank(std::string_view c) {
  constexpr std::array<std::string_view, 9> kOrder = {
      "sg", "pl", "sgsg", "plpl", "sgpl", "plsg", "simple", "longer",
      "SentCompl"};
  for (std::size_t i = 0; i < kOrder.size(); ++i)
    if (kOrder[i] == c) return static_cast<int>(i);
  return static_cast<int>(kOrder.size());
}

}  // namespace agreebench
