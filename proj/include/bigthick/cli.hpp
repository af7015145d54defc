#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bigthick/enquiry.hpp"
#include "bigthick/synth.hpp"
#include "bigthick/unification.hpp"

namespace bigthick {

/// Everything a pipeline run needs. Empty paths mean "not provided" (for
/// example, no diary input gives a reference-only run).
struct RunConfig {
  std::string places;
  std::string batteries;
  std::string gps;
  std::string out_dir = "out";
  std::string label = "Trento";
  BoundingBox bbox{46.03, 46.10, 11.08, 11.16};
  Interval period = default_reference_period();
  /// Period the diary streams claim; unify rejects it when it differs from
  /// `period`. Defaults to `period`.
  std::optional<Interval> personal_period;
  std::string reference_ktlo;  // schema files; built-in schemas when empty
  std::string reference_etg;
  std::string personal_etg;
  std::string mapping;
  std::string vocabulary;
  double place_near_m = kDefaultPlaceNearMeters;
  PositionParams position;
  QuestionSchedule schedule;
  UnificationParams unification;
  unsigned workers = 1;
  SynthSpec synth;

  /// Throws ValidationError for non-positive thresholds or an empty period.
  void validate() const;
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Sets a dotted key ("unification.near_threshold_m") to a JSON-parsed value,
/// or to the raw text when it is not JSON.
void apply_override(nlohmann::json& config, const std::string& assignment);

struct Pipeline {
  std::shared_ptr<const Teleontology> reference_ktlo;
  std::shared_ptr<const Teleontology> reference_etg;
  std::shared_ptr<const Teleontology> personal_etg;
  ReferenceIngest reference;
  std::vector<PersonalStream> streams;
};

Pipeline load_reference(const RunConfig& cfg);
void load_personal(const RunConfig& cfg, Pipeline& p);
ObservationContext run_unification(const RunConfig& cfg, const Pipeline& p);

/// Entry point of the command-line tool. Exit codes: 0 success, 1 invalid
/// configuration or input, 2 I/O failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bigthick
