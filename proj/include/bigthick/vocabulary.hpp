#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bigthick {

struct WhereAnswer {
  std::string label;
  std::string etype;  // personal etype of the anonymous place entity
};

struct WithWhomAnswer {
  std::string label;
  std::string relation;  // predicate of RelationOf(#PersonK, me)
};

/// Predicate used for the "Alone" answer; no companion entity is created.
inline constexpr const char* kAloneRelation = "AloneMarker";

/// Answer vocabularies of the time-diary questions and how each answer is
/// encoded. Overridable from JSON.
struct DiaryVocabulary {
  std::vector<WhereAnswer> where;
  std::vector<std::string> what;
  std::vector<WithWhomAnswer> with_whom;
  std::set<std::string> living_places;  // `where` answers that count as living places

  const WhereAnswer& where_answer(std::string_view label) const;
  const WithWhomAnswer& with_whom_answer(std::string_view label) const;
  void check_what(std::string_view label) const;

  static DiaryVocabulary standard();
  static DiaryVocabulary from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

}  // namespace bigthick
