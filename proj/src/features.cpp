#include "agreebench/features.hpp"

namespace agreebench {

namespace {

template <typename T>
bool merge(std::optional<T>& into, const std::optional<T>& other) {
  if (!other) return true;
  if (!into) {
    into = other;
    return true;
  }
  return *into == *other;
}

}  // namespace

bool FeatureBundle::has(FeatureKind kind) const {
  switch (kind) {
    case FeatureKind::kNumber:
      return number.has_value();
    case FeatureKind::kPerson:
      return person.has_value();
    case FeatureKind::kCase:
      return grammatical_case.has_value();
  }
  return false;
}

std::optional<FeatureBundle> unify(const FeatureBundle& a,
                                   const FeatureBundle& b) {
  FeatureBundle out = a;
  if (!merge(out.number, b.number) || !merge(out.person, b.person) ||
      !merge(out.grammatical_case, b.grammatical_case)) {
    return std::nullopt;
  }
  return out;
}

std::string to_string(const FeatureBundle& f) {
  if (f.empty()) return {};
  std::string out = "[";
  auto add = [&out](std::string_view key, std::string_view value) {
    if (out.size() > 1) out += ',';
    out += key;
    out += '=';
    out += value;
  };
  if (f.number) add("num", to_string(*f.number));
  if (f.person) add("per", to_string(*f.person));
  if (f.grammatical_case) add("case", to_string(*f.grammatical_case));
  out += ']';
  return out;
}

std::string_view to_string(Number n) { return n == Number::kSg ? "sg" : "pl"; }

std::string_view to_string(Person p) {
  switch (p) {
    case Person::k1:
      return "1";
    case Person::k2:
      return "2";
    case Person::k3:
      return "3";
  }
  return "?";
}

std::string_view to_string(Case c) {
  switch (c) {
    case Case::kNom:
      return "nom";
    case Case::kAcc:
      return "acc";
    case Case::kDat:
      return "dat";
    case Case::kGen:
      return "gen";
  }
  return "?";
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::kNumber:
      return "num";
    case FeatureKind::kPerson:
      return "per";
    case FeatureKind::kCase:
      return "case";
  }
  return "?";
}

std::optional<Number> parse_number(std::string_view s) {
  if (s == "sg") return Number::kSg;
  if (s == "pl") return Number::kPl;
  return std::nullopt;
}

std::optional<Person> parse_person(std::string_view s) {
  if (s == "1") return Person::k1;
  if (s == "2") return Person::k2;
  if (s == "3") return Person::k3;
  return std::nullopt;
}

std::optional<Case> parse_case(std::string_view s) {
  if (s == "nom") return Case::kNom;
  if (s == "acc") return Case::kAcc;
  if (s == "dat") return Case::kDat;
  if (s == "gen") return Case::kGen;
  return std::nullopt;
}

std::optional<FeatureKind> parse_feature_kind(std::string_view s) {
  if (s == "num" || s == "number") return FeatureKind::kNumber;
  if (s == "per" || s == "person") return FeatureKind::kPerson;
  if (s == "case") return FeatureKind::kCase;
  return std::nullopt;
}

std::optional<std::string> feature_value(const FeatureBundle& f,
                                         FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kNumber:
      if (f.number) return std::string(to_string(*f.number));
      break;
    case FeatureKind::kPerson:
      if (f.person) return std::string(to_string(*f.person));
      break;
    case FeatureKind::kCase:
      if (f.grammatical_case) return std::string(to_string(*f.grammatical_case));
      break;
  }
  return std::nullopt;
}

std::optional<FeatureBundle> flip_feature(const FeatureBundle& f,
                                          FeatureKind kind) {
  FeatureBundle out = f;
  switch (kind) {
    case FeatureKind::kNumber:
      if (!f.number) return std::nullopt;
      out.number = *f.number == Number::kSg ? Number::kPl : Number::kSg;
      return out;
    case FeatureKind::kPerson:
      if (!f.person) return std::nullopt;
      out.person = *f.person == Person::k3 ? Person::k1 : Person::k3;
      return out;
    case FeatureKind::kCase:
      if (f.grammatical_case == Case::kAcc) {
        out.grammatical_case = Case::kDat;
        return out;
      }
      if (f.grammatical_case == Case::kDat) {
        out.grammatical_case = Case::kAcc;
        return out;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace agreebench
