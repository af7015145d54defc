#include "bigthick/vocabulary.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bigthick/error.hpp"

namespace bigthick {

using nlohmann::json;

const WhereAnswer& DiaryVocabulary::where_answer(std::string_view label) const {
  auto it = std::find_if(where.begin(), where.end(), [&](const WhereAnswer& a) { return a.label == label; });
  if (it == where.end()) throw ValidationError(fmt::format("unknown 'where' answer '{}'", label));
  return *it;
}

const WithWhomAnswer& DiaryVocabulary::with_whom_answer(std::string_view label) const {
  auto it = std::find_if(with_whom.begin(), with_whom.end(), [&](const WithWhomAnswer& a) { return a.label == label; });
  if (it == with_whom.end()) throw ValidationError(fmt::format("unknown 'withWhom' answer '{}'", label));
  return *it;
}

void DiaryVocabulary::check_what(std::string_view label) const {
  if (std::find(what.begin(), what.end(), label) == what.end()) {
    throw ValidationError(fmt::format("unknown 'what' answer '{}'", label));
  }
}

DiaryVocabulary DiaryVocabulary::standard() {
  DiaryVocabulary v;
  v.where = {
      {"Home", "Residence"},
      {"Relatives Home", "Residence"},
      {"House (friends, others)", "Residence"},
      {"Classroom / Study hall", "University"},
      {"University Library", "Library"},
      {"Other university place", "University"},
      {"Canteen", "Canteen"},
      {"Bar, pub, etc.", "Bar"},
      {"Restaurant, pizzeria", "Restaurant"},
      {"Shop, supermarket, etc.", "Supermarket"},
      {"Bank, post office", "Bank"},
      {"Gym, sport facility", "SportsCentre"},
      {"Workplace", "Workplace"},
      {"Outdoors", "Outdoors"},
      {"On foot", "Transit"},
      {"On a vehicle", "Transit"},
      {"Other place", "Location"},
  };
  v.what = {"Sleeping",
            "Eating",
            "Studying",
            "Lesson",
            "Personal care",
            "Cooking",
            "Housework",
            "Shopping",
            "Work",
            "Sport",
            "Walking",
            "Travelling",
            "Social life",
            "Reading",
            "Watching TV / streaming",
            "Listening to music",
            "Social media / internet",
            "Phone calls / chatting",
            "Hobbies",
            "Resting",
            "Break",
            "Queueing / waiting",
            "Other"};
  v.with_whom = {
      {"Alone", kAloneRelation},
      {"Friend(s)", "FriendOf"},
      {"Classmate(s)", "ClassmateOf"},
      {"Roommate(s)", "OtherRelation"},
      {"Partner", "PartnerOf"},
      {"Relative(s)", "RelativeOf"},
      {"Colleague(s)", "ColleagueOf"},
      {"Stranger(s)", "StrangerTo"},
      {"Other", "OtherRelation"},
  };
  v.living_places = {"Home", "Relatives Home", "House (friends, others)"};
  return v;
}

DiaryVocabulary DiaryVocabulary::from_json(const json& j) {
  try {
    DiaryVocabulary v;
    for (const auto& w : j.at("where")) v.where.push_back({w.at("label"), w.at("etype")});
    v.what = j.at("what").get<std::vector<std::string>>();
    for (const auto& w : j.at("withWhom")) v.with_whom.push_back({w.at("label"), w.at("relation")});
    v.living_places = j.at("living_places").get<std::set<std::string>>();
    return v;
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed diary vocabulary: {}", e.what()));
  }
}

json DiaryVocabulary::to_json() const {
  json w = json::array();
  for (const auto& a : where) w.push_back({{"label", a.label}, {"etype", a.etype}});
  json ww = json::array();
  for (const auto& a : with_whom) ww.push_back({{"label", a.label}, {"relation", a.relation}});
  return {{"where", w}, {"what", what}, {"withWhom", ww}, {"living_places", living_places}};
}

}  // namespace bigthick
