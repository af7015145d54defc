#pragma once

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bigthick/graph.hpp"
#include "bigthick/personal.hpp"
#include "bigthick/spatial_index.hpp"
#include "bigthick/teleontology.hpp"

namespace bigthick {

/// Hand-written schema alignment between the personal and reference ETGs.
struct MappingConfig {
  std::vector<std::pair<std::string, std::string>> etype_pairs;     // personal <-> reference
  std::vector<std::pair<std::string, std::string>> property_pairs;  // personal <-> reference

  static MappingConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct UnificationParams {
  double near_threshold_m = 50.0;
  double coidentity_eps_m = 25.0;
  std::size_t coidentity_min_overlap = 10;
  /// Keep only candidates whose name equals the anonymous place's name, when
  /// it has one.
  bool name_prefilter = false;
  double cell_size_m = kDefaultCellSizeMeters;
  unsigned workers = 1;

  void validate() const;
  static UnificationParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Bidirectional etype/property lookup produced by EPU.
class Alignment {
 public:
  const std::vector<std::string>& reference_etypes(std::string_view personal) const;
  const std::vector<std::string>& personal_etypes(std::string_view reference) const;
  std::optional<std::string> reference_property(std::string_view personal) const;
  std::optional<std::string> personal_property(std::string_view reference) const;

  /// Exact match after alignment, or subsumption when a reference KTLO was
  /// supplied (the candidate's etype descends from an aligned etype).
  bool compatible(std::string_view personal_etype, std::string_view reference_etype) const;

  const std::vector<std::string>& unaligned_personal() const { return unaligned_personal_; }
  const std::vector<std::string>& unaligned_reference() const { return unaligned_reference_; }
  bool empty() const { return to_reference_.empty(); }

 private:
  friend Alignment epu_align(const Teleontology&, const Teleontology&, const MappingConfig&,
                             std::shared_ptr<const Teleontology>);

  std::map<std::string, std::vector<std::string>, std::less<>> to_reference_;
  std::map<std::string, std::vector<std::string>, std::less<>> to_personal_;
  std::map<std::string, std::string, std::less<>> prop_to_reference_;
  std::map<std::string, std::string, std::less<>> prop_to_personal_;
  std::vector<std::string> unaligned_personal_;
  std::vector<std::string> unaligned_reference_;
  std::shared_ptr<const Teleontology> reference_ktlo_;
};

/// Throws ValidationError when a pair names an etype or property absent from
/// its ETG.
Alignment epu_align(const Teleontology& personal_etg, const Teleontology& reference_etg,
                    const MappingConfig& mapping, std::shared_ptr<const Teleontology> reference_ktlo = nullptr);

struct NearPlace {
  const Entity* entity;
  double distance_m;
};

struct StuNear {
  std::vector<NearPlace> places;  // ascending by distance, then id
  std::vector<Triple> triples;    // Near(phone, place, dT), derived
};

/// Reference places within the near threshold of the context's estimated
/// position. `ix` must index `ref` via index_entities.
StuNear stu_near(const TimedPersonalContext& ctx, const EntityGraph& ref, const SpatialIndex& ix,
                 const UnificationParams& params);

struct Resolution {
  int userid = 0;
  Timestamp center;
  Interval interval;
  std::string anonymous_id;
  std::string reference_id;
  double distance_m = 0.0;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Closest etype-compatible candidate for the context's anonymous place;
/// equal distances go to the smaller id.
std::optional<Resolution> eu_resolve(const TimedPersonalContext& ctx, std::span<const NearPlace> near_places,
                                     const Alignment& alignment, const UnificationParams& params = {});

/// Triples added when a context resolves: SameAs(anon, ref), <Etype>Of(me, ref)
/// and Near(companion, ref), all valid over the context interval.
std::vector<Triple> resolution_triples(const TimedPersonalContext& ctx, const Resolution& r, const Entity& place);

struct Coidentity {
  int user_a = 0;
  int user_b = 0;
  std::size_t overlaps = 0;
  bool same_entity = false;
  std::vector<Triple> triples;
};

/// Compares two streams over every pair of positively overlapping, positioned
/// contexts. Throws ValidationError when both streams belong to one user.
Coidentity stu_coidentity(const PersonalStream& a, const PersonalStream& b, const UnificationParams& params);

struct UnificationStats {
  std::size_t reference_entities = 0;
  std::size_t streams = 0;
  std::size_t timed_contexts = 0;
  std::size_t unified_context_count = 0;
  std::size_t derived_relation_count = 0;
  std::size_t matched_reference_entity_count = 0;
  double coverage_fraction = 0.0;
  std::map<std::string, std::size_t> derived_by_predicate;

  nlohmann::json to_json() const;
};

/// C = C_R unified with every personal stream.
struct ObservationContext {
  std::shared_ptr<const EntityGraph> reference;
  std::vector<PersonalStream> streams;
  std::vector<Triple> derived;          // canonical order
  std::vector<Resolution> resolutions;  // by stream order, then time
  std::vector<Coidentity> coidentities;  // same-entity verdicts only
  UnificationStats stats;

  /// Context a resolution came from.
  const TimedPersonalContext* context_of(const Resolution& r) const;
};

/// Phase 1: every context of every stream against the reference graph
/// (STU near, then EU). Phase 2: pairwise STU between streams. Throws
/// ValidationError when a stream's period differs from the reference period.
ObservationContext unify(std::shared_ptr<const EntityGraph> ref, std::vector<PersonalStream> streams,
                         const UnificationParams& params, const Alignment& alignment);

UnificationStats compute_stats(const ObservationContext& obs);

nlohmann::json resolution_to_json(const Resolution& r);
void write_resolutions_jsonl(std::ostream& out, std::span<const Resolution> resolutions);
/// Derived triples followed by resolutions; used for byte-level comparisons.
std::string serialize(const ObservationContext& obs);

}  // namespace bigthick
