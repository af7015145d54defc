#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bigthick/personal.hpp"
#include "bigthick/reference.hpp"

namespace bigthick {

struct PlantedVisit {
  int userid = 0;
  std::size_t place_index = 0;
  Timestamp at;
  double jitter_m = 8.0;
};

struct PlantedColocation {
  int user_a = 0;
  int user_b = 0;
  Timestamp at;
};

struct SynthSpec {
  std::uint64_t seed = 7;
  std::size_t n_places = 500;
  std::size_t n_participants = 20;
  int first_userid = 1;
  BoundingBox bbox{46.03, 46.10, 11.08, 11.16};
  Timestamp start = default_reference_period().start;
  int weeks = 4;
  QuestionSchedule schedule;
  /// Drawn at random on top of the explicit lists below.
  std::size_t random_visits = 0;
  std::size_t random_colocations = 0;
  double max_jitter_m = 10.0;
  std::vector<PlantedVisit> visits;
  std::vector<PlantedColocation> colocations;
  double step_sigma_m = 5.0;  // per minute
  double gps_noise_m = 10.0;
  double home_pull = 0.02;    // fraction of the distance to home recovered per minute
  std::int64_t gps_period_s = kMinute;
  std::int64_t hold_s = 10 * kMinute;  // planted stays last +-hold_s
  double unanswered_rate = 0.10;
  double polygon_rate = 0.10;  // share of buildings drawn as footprints

  Interval period() const { return {start, start + weeks * kWeek}; }
  void validate() const;
  static SynthSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ExpectedResolution {
  int userid = 0;
  Timestamp at;
  std::string place_id;
};

struct ExpectedColocation {
  int user_a = 0;  // user_a < user_b
  int user_b = 0;
  Timestamp at;
  GeoPoint where;
};

struct GroundTruth {
  std::vector<ExpectedResolution> resolutions;
  std::vector<ExpectedColocation> colocations;
  std::map<std::string, bool> residential;  // building id -> E1 label

  nlohmann::json to_json() const;
};

struct SynthData {
  BoundingBox region;
  Interval period;
  std::vector<PlaceRecord> places;
  std::vector<QuestionBattery> batteries;
  std::vector<GpsSample> gps;
  GroundTruth truth;
};

/// Uniform places inside the bbox. Same spec, same bytes.
std::vector<PlaceRecord> gen_places(const SynthSpec& spec, GroundTruth* truth = nullptr);

/// Random-walk GPS traces and diaries with the planted visits and
/// co-locations. Throws ValidationError for plants outside the period, on
/// unknown users or places, or overlapping one another.
void gen_participants(const SynthSpec& spec, SynthData& data);

SynthData generate(const SynthSpec& spec);

/// `where` answer a visitor of this place gives.
std::string where_answer_for(const PlaceRecord& place);

}  // namespace bigthick
