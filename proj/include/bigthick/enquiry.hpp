#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bigthick/unification.hpp"

namespace bigthick {

/// A constant or a variable ("?x").
struct Term {
  std::string text;
  bool is_variable() const { return text.size() > 1 && text.front() == '?'; }
  friend bool operator==(const Term&, const Term&) = default;
};

/// (s, p, o) with an optional variable bound to the matched triple's validity
/// interval, which lets patterns join on "the same moment".
struct Pattern {
  Term subject;
  Term predicate;
  Term object;
  std::optional<std::string> time_var;
};

struct Enquiry {
  std::string id;
  std::vector<Pattern> patterns;
  std::vector<std::string> select;  // empty = every variable
  std::optional<std::string> count;  // count distinct values per selected group
  std::vector<Interval> during;      // timed triples must overlap one of these
  std::set<int> days_of_week;        // timed triples must touch one of these days
  std::set<int> users;               // empty = all participants

  /// Throws ValidationError: no pattern, unknown select/count variable,
  /// malformed interval or weekday.
  void validate() const;
  std::vector<std::string> variables() const;
  static Enquiry from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

Enquiry read_enquiry_file(const std::string& path);

enum class EnquiryClass { R, P, PR, RP };
std::string_view to_string(EnquiryClass c);

/// A triple as seen by the enquiry engine. Entity attributes (etype, name,
/// class and every extra property) become reference facts; anonymous
/// entities get personal etype facts valid over their context.
struct Fact {
  std::string subject;
  std::string predicate;
  std::string object;
  std::optional<Interval> validity;
  Provenance provenance = Provenance::Reference;
  std::vector<int> owners;  // participants the fact is about
};

struct EnquiryResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // sorted, distinct
  std::vector<std::string> warnings;
};

/// Immutable view of an observation context; all queries are const.
class ObservationStore {
 public:
  explicit ObservationStore(const ObservationContext& obs);

  /// Stored facts; Near facts appear once per orientation.
  const std::vector<Fact>& facts() const { return facts_; }
  bool knows_predicate(std::string_view p) const { return by_predicate_.contains(std::string(p)); }
  /// Does fact `f` pass the enquiry's temporal and user filters?
  static bool admits(const Enquiry& e, const Fact& f);

  EnquiryResult evaluate(const Enquiry& e) const;
  EnquiryClass classify(const Enquiry& e) const;

 private:
  struct Solution {
    std::vector<std::string> values;    // by variable slot
    std::vector<std::size_t> matched;   // fact per pattern
  };
  std::vector<Solution> solve(const Enquiry& e, const std::vector<std::string>& vars,
                              std::vector<std::string>* warnings) const;

  std::vector<Fact> facts_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_predicate_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_subject_;  // predicate + subject
  std::unordered_map<std::string, std::vector<std::size_t>> by_object_;   // predicate + object
};

/// Participant a node id belongs to ("User7", "#Bar1@User7"), if any.
std::optional<int> owner_of(std::string_view id);

EnquiryResult evaluate(const Enquiry& e, const ObservationContext& obs);
EnquiryClass classify_enquiry(const Enquiry& e, const ObservationContext& obs);
void write_result_csv(std::ostream& out, const EnquiryResult& r);

enum class Source { Reference, Personal, Unified };
std::string_view to_string(Source s);
Source parse_source(std::string_view s);

using PropertySchema = std::set<std::string, std::less<>>;

/// Properties a source exposes. The unified schema is the union of both
/// sources, and is empty until at least one context has been resolved.
PropertySchema available_schema(const ObservationContext& obs, Source s);

/// Target and every feature present in the schema.
bool purpose_feasibility(const PropertySchema& schema, std::string_view target,
                         const std::set<std::string>& features);

/// A prediction enquiry. `features` decide feasibility; the other entries of
/// `columns` are exported whenever the schema carries them.
struct PredictionSpec {
  std::string id;
  std::string target;
  std::vector<std::string> columns;
  std::set<std::string> features;
  std::set<std::string> positive;  // target values labelled 1
};

/// E1 residential buildings, E2 living places, E3 banks.
const PredictionSpec& prediction_spec(std::string_view id);
std::vector<std::string> prediction_ids();

struct FeatureTable {
  std::vector<std::string> columns;  // last column is "target"
  std::vector<std::vector<std::string>> rows;
};

/// Throws ValidationError naming the first missing property when the enquiry is
/// infeasible on the chosen source.
FeatureTable export_features(const ObservationContext& obs, const PredictionSpec& spec, Source source);
void write_feature_csv(std::ostream& out, const FeatureTable& t);

/// Reference graph, personal streams, and the unified slice: matched
/// reference entities, resolved contexts and the derived triples valid over
/// those contexts.
void write_reference_export(std::ostream& out, const EntityGraph& ref);
void write_personal_export(std::ostream& out, const ObservationContext& obs);
void write_unified_export(std::ostream& out, const ObservationContext& obs);

struct DatasetStats {
  UnificationStats unification;
  std::size_t reference_triples = 0;
  std::size_t personal_triples = 0;
  std::size_t reference_export_bytes = 0;
  std::size_t personal_export_bytes = 0;
  std::size_t unified_export_bytes = 0;
  double compression_ratio = 0.0;  // unified / (reference + personal)

  nlohmann::json to_json() const;
};

DatasetStats dataset_stats(const ObservationContext& obs);

}  // namespace bigthick
