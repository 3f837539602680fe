#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace agreebench {

enum class Number { kSg, kPl };
enum class Person { k1, k2, k3 };
enum class Case { kNom, kAcc, kDat, kGen };

// The feature kinds a test case may flip at its locus.
enum class FeatureKind { kNumber, kPerson, kCase };

// Agreement features of a grammar symbol. Absent features are unspecified and
// unify with anything.
struct FeatureBundle {
  std::optional<Number> number;
  std::optional<Person> person;
  std::optional<Case> grammatical_case;

  bool empty() const { return !number && !person && !grammatical_case; }
  bool has(FeatureKind kind) const;

  friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
};

std::optional<FeatureBundle> unify(const FeatureBundle& a,
                                   const FeatureBundle& b);

// Canonical "[num=sg,per=3,case=acc]" form; empty string for an empty bundle.
std::string to_string(const FeatureBundle& features);

std::string_view to_string(Number n);
std::string_view to_string(Person p);
std::string_view to_string(Case c);
std::string_view to_string(FeatureKind k);

std::optional<Number> parse_number(std::string_view s);
std::optional<Person> parse_person(std::string_view s);
std::optional<Case> parse_case(std::string_view s);
std::optional<FeatureKind> parse_feature_kind(std::string_view s);

// Value of one feature as its file spelling ("sg", "3", "acc"), if present.
std::optional<std::string> feature_value(const FeatureBundle& f,
                                         FeatureKind kind);

// The counterpart bundle used to build the ungrammatical variant:
// sg<->pl, acc<->dat, and person 1->3, 2->3, 3->1. Returns nullopt when the
// bundle does not specify `kind` or the value has no counterpart (nom, gen).
std::optional<FeatureBundle> flip_feature(const FeatureBundle& f,
                                          FeatureKind kind);

}  // namespace agreebench
