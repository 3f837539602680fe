#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace agreebench {

// The fourteen agreement test cases, in table order.
enum class Phenomenon {
  kSimpleSentence,
  kInSententialComplement,
  kShortVpCoord,
  kMediumVpCoord,
  kLongVpCoord,
  kAcrossPp,
  kAcrossSubjRel,
  kAcrossObjRel,
  kInObjRel,
  kSimpleModifier,
  kExtendedModifier,
  kPreField,
  kRaPersonNumber,
  kRaCase,
};

inline constexpr std::array<Phenomenon, 14> kAllPhenomena = {
    Phenomenon::kSimpleSentence,   Phenomenon::kInSententialComplement,
    Phenomenon::kShortVpCoord,     Phenomenon::kMediumVpCoord,
    Phenomenon::kLongVpCoord,      Phenomenon::kAcrossPp,
    Phenomenon::kAcrossSubjRel,    Phenomenon::kAcrossObjRel,
    Phenomenon::kInObjRel,         Phenomenon::kSimpleModifier,
    Phenomenon::kExtendedModifier, Phenomenon::kPreField,
    Phenomenon::kRaPersonNumber,   Phenomenon::kRaCase,
};

// Stable identifier used in files, e.g. "across_pp".
std::string_view id(Phenomenon p);
std::optional<Phenomenon> parse_phenomenon(std::string_view id);

// Row label in rendered tables, e.g. "Across a PP".
std::string_view display_name(Phenomenon p);

bool is_reflexive(Phenomenon p);

// Sort key for condition labels: sg, pl, sgsg, plpl, sgpl, plsg, simple,
// longer, SentCompl, then anything else.
int condition_rank(std::string_view condition);

}  // namespace agreebench
