#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bigthick/geo.hpp"
#include "bigthick/graph.hpp"
#include "bigthick/time.hpp"
#include "bigthick/vocabulary.hpp"

namespace bigthick {

/// Entity id of a participant ("User73").
std::string user_entity_id(int userid);
/// Inverse of user_entity_id; nullopt for other ids.
std::optional<int> parse_user_entity_id(std::string_view id);

/// One timed set of diary answers. Any answer may be missing.
struct QuestionBattery {
  int userid = 0;
  Timestamp at;
  std::optional<std::string> where;
  std::optional<std::string> what;
  std::optional<std::string> with_whom;
  std::optional<int> mood;

  bool answered() const { return where || what || with_whom || mood; }
};

struct GpsSample {
  int userid = 0;
  Timestamp at;
  GeoPoint point;
};

/// Locally scoped entity introduced by a diary answer (#Restaurant1, #Person2).
struct AnonymousEntity {
  std::string id;
  std::string etype;
  std::optional<std::string> name;
  friend bool operator==(const AnonymousEntity&, const AnonymousEntity&) = default;
};

/// Issues "#<Etype><k>" ids from one counter; a non-empty scope is appended
/// as "@<scope>" so ids stay unique once streams are merged.
class AnonymousIdSource {
 public:
  explicit AnonymousIdSource(std::string scope = "") : scope_(std::move(scope)) {}
  std::string next(std::string_view etype);

 private:
  std::string scope_;
  std::uint64_t counter_ = 0;
};

/// One event E(L, t) as perceived by a participant.
struct TimedPersonalContext {
  int userid = 0;
  Timestamp center;
  Interval interval;
  std::vector<Triple> triples;
  std::optional<GeoPoint> position;
  std::vector<AnonymousEntity> anonymous;
  QuestionBattery answers;

  /// Anonymous place created from the `where` answer, if any.
  const AnonymousEntity* place() const;
  const AnonymousEntity* phone() const;
  const AnonymousEntity* companion() const;
};

struct PersonalStream {
  int userid = 0;
  Interval period;  // governing reference observation period
  std::vector<TimedPersonalContext> contexts;
};

struct PositionParams {
  std::int64_t window_s = 10 * kMinute;
  double eps_m = 30.0;
  std::size_t min_pts = 3;
};

/// Mean of the largest DBSCAN cluster among samples with |t - t_q| <= window/2.
/// Equal-size clusters are decided by the sample closest in time to t_q.
/// Altitude is averaged only when every member has one.
std::optional<GeoPoint> estimate_position(std::span<const GpsSample> samples, Timestamp t_q,
                                          const PositionParams& params = {});

/// Encodes one battery as triples. Unknown answers throw ValidationError
/// naming the value; mood outside [1, 5] as well.
TimedPersonalContext battery_to_context(const QuestionBattery& b, const Interval& interval,
                                        const std::optional<GeoPoint>& pos, AnonymousIdSource& ids,
                                        const DiaryVocabulary& vocab = DiaryVocabulary::standard());

/// Question spacing per week of the observation period; the last entry
/// covers any later week.
struct QuestionSchedule {
  std::vector<std::int64_t> spacing_s{30 * kMinute, 30 * kMinute, kHour, kHour};
  std::int64_t spacing_at(const Interval& period, Timestamp t) const;
};

/// One context per answered battery of `userid`, centered on the battery time
/// with the week's spacing as duration (clipped to the period). Batteries
/// outside the period, or repeating a timestamp, are dropped with a warning.
PersonalStream build_stream(int userid, std::span<const QuestionBattery> batteries,
                            std::span<const GpsSample> samples, const Interval& period,
                            const QuestionSchedule& schedule = {}, const PositionParams& params = {},
                            const DiaryVocabulary& vocab = DiaryVocabulary::standard());

/// Builds every participant's stream, ordered by userid. Participants are
/// independent, so `workers` > 1 builds them concurrently.
std::vector<PersonalStream> build_streams(std::span<const QuestionBattery> batteries,
                                          std::span<const GpsSample> samples, const Interval& period,
                                          const QuestionSchedule& schedule = {}, const PositionParams& params = {},
                                          const DiaryVocabulary& vocab = DiaryVocabulary::standard(),
                                          unsigned workers = 1);

/// CSV header: userid,timestamp,where,what,withWhom,mood (empty = unanswered)
std::vector<QuestionBattery> read_batteries_csv(std::istream& in);
void write_batteries_csv(std::ostream& out, std::span<const QuestionBattery> batteries);
/// CSV header: userid,timestamp,lat,lon,alt
std::vector<GpsSample> read_gps_csv(std::istream& in);
void write_gps_csv(std::ostream& out, std::span<const GpsSample> samples);

nlohmann::json context_to_json(const TimedPersonalContext& c);
TimedPersonalContext context_from_json(const nlohmann::json& j);
/// One context per line, streams in order.
void write_streams_jsonl(std::ostream& out, std::span<const PersonalStream> streams);
std::vector<PersonalStream> read_streams_jsonl(std::istream& in, const Interval& period);

}  // namespace bigthick
