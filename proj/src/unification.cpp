#include "bigthick/unification.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "bigthick/error.hpp"
#include "bigthick/reference.hpp"

namespace bigthick {

using nlohmann::json;

MappingConfig MappingConfig::from_json(const json& j) {
  MappingConfig m;
  try {
    for (const auto& p : j.value("etypes", json::array())) {
      m.etype_pairs.emplace_back(p.at("personal").get<std::string>(), p.at("reference").get<std::string>());
    }
    for (const auto& p : j.value("properties", json::array())) {
      m.property_pairs.emplace_back(p.at("personal").get<std::string>(), p.at("reference").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed mapping config: {}", e.what()));
  }
  return m;
}

json MappingConfig::to_json() const {
  json et = json::array();
  for (const auto& [p, r] : etype_pairs) et.push_back({{"personal", p}, {"reference", r}});
  json pr = json::array();
  for (const auto& [p, r] : property_pairs) pr.push_back({{"personal", p}, {"reference", r}});
  return {{"etypes", et}, {"properties", pr}};
}

void UnificationParams::validate() const {
  if (!(near_threshold_m > 0.0)) throw ValidationError("near_threshold_m must be positive");
  if (!(coidentity_eps_m > 0.0)) throw ValidationError("coidentity_eps_m must be positive");
  if (coidentity_min_overlap == 0) throw ValidationError("coidentity_min_overlap must be positive");
  if (!(cell_size_m > 0.0)) throw ValidationError("cell_size_m must be positive");
}

UnificationParams UnificationParams::from_json(const json& j) {
  UnificationParams p;
  p.near_threshold_m = j.value("near_threshold_m", p.near_threshold_m);
  p.coidentity_eps_m = j.value("coidentity_eps_m", p.coidentity_eps_m);
  p.coidentity_min_overlap = j.value("coidentity_min_overlap", p.coidentity_min_overlap);
  p.name_prefilter = j.value("name_prefilter", p.name_prefilter);
  p.cell_size_m = j.value("cell_size_m", p.cell_size_m);
  p.workers = j.value("workers", p.workers);
  p.validate();
  return p;
}

json UnificationParams::to_json() const {
  return {{"near_threshold_m", near_threshold_m},
          {"coidentity_eps_m", coidentity_eps_m},
          {"coidentity_min_overlap", coidentity_min_overlap},
          {"name_prefilter", name_prefilter},
          {"cell_size_m", cell_size_m},
          {"workers", workers}};
}

namespace {

const std::vector<std::string>& lookup(const std::map<std::string, std::vector<std::string>, std::less<>>& m,
                                       std::string_view key) {
  static const std::vector<std::string> none;
  auto it = m.find(key);
  return it == m.end() ? none : it->second;
}

bool schema_has_property(const Teleontology& t, std::string_view name) {
  return std::any_of(t.etypes().begin(), t.etypes().end(),
                     [&](const Etype& e) { return t.closure(e.id).has(name); });
}

}  // namespace

const std::vector<std::string>& Alignment::reference_etypes(std::string_view personal) const {
  return lookup(to_reference_, personal);
}

const std::vector<std::string>& Alignment::personal_etypes(std::string_view reference) const {
  return lookup(to_personal_, reference);
}

std::optional<std::string> Alignment::reference_property(std::string_view personal) const {
  auto it = prop_to_reference_.find(personal);
  if (it == prop_to_reference_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Alignment::personal_property(std::string_view reference) const {
  auto it = prop_to_personal_.find(reference);
  if (it == prop_to_personal_.end()) return std::nullopt;
  return it->second;
}

bool Alignment::compatible(std::string_view personal_etype, std::string_view reference_etype) const {
  for (const auto& r : reference_etypes(personal_etype)) {
    if (r == reference_etype) return true;
    if (reference_ktlo_ && reference_ktlo_->is_descendant(reference_etype, r)) return true;
  }
  return false;
}

Alignment epu_align(const Teleontology& personal_etg, const Teleontology& reference_etg, const MappingConfig& mapping,
                    std::shared_ptr<const Teleontology> reference_ktlo) {
  if (personal_etg.stage() != Stage::ETG || reference_etg.stage() != Stage::ETG) {
    throw ValidationError("schema alignment needs two ETGs");
  }
  Alignment a;
  a.reference_ktlo_ = std::move(reference_ktlo);
  for (const auto& [p, r] : mapping.etype_pairs) {
    if (!personal_etg.contains(p)) throw ValidationError(fmt::format("mapping names unknown personal etype '{}'", p));
    if (!reference_etg.contains(r)) {
      throw ValidationError(fmt::format("mapping names unknown reference etype '{}'", r));
    }
    auto& fwd = a.to_reference_[p];
    if (std::find(fwd.begin(), fwd.end(), r) == fwd.end()) fwd.push_back(r);
    auto& back = a.to_personal_[r];
    if (std::find(back.begin(), back.end(), p) == back.end()) back.push_back(p);
  }
  for (const auto& [p, r] : mapping.property_pairs) {
    if (!schema_has_property(personal_etg, p)) {
      throw ValidationError(fmt::format("mapping names unknown personal property '{}'", p));
    }
    if (!schema_has_property(reference_etg, r)) {
      throw ValidationError(fmt::format("mapping names unknown reference property '{}'", r));
    }
    a.prop_to_reference_[p] = r;
    a.prop_to_personal_[r] = p;
  }
  for (const auto& e : personal_etg.etypes())
    if (!a.to_reference_.contains(e.id)) a.unaligned_personal_.push_back(e.id);
  for (const auto& e : reference_etg.etypes())
    if (!a.to_personal_.contains(e.id)) a.unaligned_reference_.push_back(e.id);
  return a;
}

StuNear stu_near(const TimedPersonalContext& ctx, const EntityGraph& ref, const SpatialIndex& ix,
                 const UnificationParams& params) {
  StuNear out;
  if (!ctx.position) return out;
  const AnonymousEntity* phone = ctx.phone();
  const std::string subject = phone ? phone->id : user_entity_id(ctx.userid);
  for (const auto& hit : ix.query_within(*ctx.position, params.near_threshold_m)) {
    const Entity& place = ref.entities()[hit.slot];
    out.places.push_back({&place, hit.distance_m});
    out.triples.push_back(
        Triple{subject, "Near", place.id, false, ctx.interval, Provenance::Derived, hit.distance_m});
  }
  return out;
}

std::optional<Resolution> eu_resolve(const TimedPersonalContext& ctx, std::span<const NearPlace> near_places,
                                     const Alignment& alignment, const UnificationParams& params) {
  const AnonymousEntity* place = ctx.place();
  if (place == nullptr) return std::nullopt;
  const NearPlace* best = nullptr;
  for (const auto& cand : near_places) {
    if (!alignment.compatible(place->etype, cand.entity->etype)) continue;
    if (params.name_prefilter && place->name && cand.entity->name != place->name) continue;
    if (best == nullptr || cand.distance_m < best->distance_m ||
        (cand.distance_m == best->distance_m && cand.entity->id < best->entity->id)) {
      best = &cand;
    }
  }
  if (best == nullptr) return std::nullopt;
  return Resolution{ctx.userid, ctx.center, ctx.interval, place->id, best->entity->id, best->distance_m};
}

std::vector<Triple> resolution_triples(const TimedPersonalContext& ctx, const Resolution& r, const Entity& place) {
  std::vector<Triple> out;
  out.push_back(Triple{r.anonymous_id, "SameAs", r.reference_id, false, ctx.interval, Provenance::Derived,
                       r.distance_m});
  out.push_back(Triple{user_entity_id(ctx.userid), place.etype + "Of", r.reference_id, false, ctx.interval,
                       Provenance::Derived, std::nullopt});
  if (const AnonymousEntity* who = ctx.companion()) {
    out.push_back(
        Triple{who->id, "Near", r.reference_id, false, ctx.interval, Provenance::Derived, std::nullopt});
  }
  return out;
}

Coidentity stu_coidentity(const PersonalStream& a, const PersonalStream& b, const UnificationParams& params) {
  if (a.userid == b.userid) {
    throw ValidationError(fmt::format("co-identity needs two different users, got {} twice", a.userid));
  }
  const PersonalStream& lo = a.userid < b.userid ? a : b;
  const PersonalStream& hi = a.userid < b.userid ? b : a;

  std::vector<const TimedPersonalContext*> other;
  std::int64_t longest = 0;
  for (const auto& c : hi.contexts) {
    if (!c.position) continue;
    other.push_back(&c);
    longest = std::max(longest, c.interval.length());
  }
  std::sort(other.begin(), other.end(), [](const auto* x, const auto* y) {
    return std::tie(x->interval.start, x->center) < std::tie(y->interval.start, y->center);
  });

  struct Pair {
    Interval shared;
    double distance;
  };
  std::vector<Pair> pairs;
  for (const auto& c : lo.contexts) {
    if (!c.position) continue;
    auto it = std::lower_bound(other.begin(), other.end(), c.interval.start - longest,
                               [](const TimedPersonalContext* x, Timestamp t) { return x->interval.start < t; });
    for (; it != other.end() && (*it)->interval.start < c.interval.end; ++it) {
      if (!c.interval.overlaps_strictly((*it)->interval)) continue;
      pairs.push_back({c.interval.intersect((*it)->interval), geo_distance(*c.position, *(*it)->position)});
    }
  }

  Coidentity out{lo.userid, hi.userid, pairs.size(), false, {}};
  const std::string ua = user_entity_id(lo.userid), ub = user_entity_id(hi.userid);
  const bool always_close = std::all_of(pairs.begin(), pairs.end(),
                                        [&](const Pair& p) { return p.distance <= params.coidentity_eps_m; });
  if (!pairs.empty() && pairs.size() >= params.coidentity_min_overlap && always_close) {
    out.same_entity = true;
    Interval span = pairs.front().shared;
    double worst = 0.0;
    for (const auto& p : pairs) {
      span.start = std::min(span.start, p.shared.start);
      span.end = std::max(span.end, p.shared.end);
      worst = std::max(worst, p.distance);
    }
    out.triples.push_back(Triple{ua, "SameEntity", ub, false, span, Provenance::Derived, worst});
    return out;
  }
  for (const auto& p : pairs) {
    if (p.distance <= params.near_threshold_m) {
      out.triples.push_back(Triple{ua, "Near", ub, false, p.shared, Provenance::Derived, p.distance});
    }
  }
  return out;
}

json UnificationStats::to_json() const {
  return {{"reference_entities", reference_entities},
          {"streams", streams},
          {"timed_contexts", timed_contexts},
          {"unified_context_count", unified_context_count},
          {"derived_relation_count", derived_relation_count},
          {"matched_reference_entity_count", matched_reference_entity_count},
          {"coverage_fraction", coverage_fraction},
          {"derived_by_predicate", derived_by_predicate}};
}

const TimedPersonalContext* ObservationContext::context_of(const Resolution& r) const {
  for (const auto& s : streams) {
    if (s.userid != r.userid) continue;
    auto it = std::lower_bound(s.contexts.begin(), s.contexts.end(), r.center,
                               [](const TimedPersonalContext& c, Timestamp t) { return c.center < t; });
    if (it != s.contexts.end() && it->center == r.center) return &*it;
  }
  return nullptr;
}

UnificationStats compute_stats(const ObservationContext& obs) {
  UnificationStats st;
  st.reference_entities = obs.reference ? obs.reference->entities().size() : 0;
  st.streams = obs.streams.size();
  for (const auto& s : obs.streams) st.timed_contexts += s.contexts.size();
  std::set<std::pair<int, Timestamp>> unified;
  std::set<std::string> matched;
  for (const auto& r : obs.resolutions) {
    unified.insert({r.userid, r.center});
    matched.insert(r.reference_id);
  }
  st.unified_context_count = unified.size();
  st.matched_reference_entity_count = matched.size();
  st.derived_relation_count = obs.derived.size();
  for (const auto& t : obs.derived) ++st.derived_by_predicate[t.predicate];
  st.coverage_fraction =
      st.timed_contexts == 0 ? 0.0 : static_cast<double>(st.unified_context_count) / static_cast<double>(st.timed_contexts);
  return st;
}

namespace {

struct StreamOutcome {
  std::vector<Triple> triples;
  std::vector<Resolution> resolutions;
};

StreamOutcome unify_stream(const PersonalStream& s, const EntityGraph& ref, const SpatialIndex& ix,
                           const UnificationParams& params, const Alignment& alignment) {
  StreamOutcome out;
  for (const auto& ctx : s.contexts) {
    StuNear near = stu_near(ctx, ref, ix, params);
    if (near.places.empty()) continue;
    out.triples.insert(out.triples.end(), near.triples.begin(), near.triples.end());
    if (auto r = eu_resolve(ctx, near.places, alignment, params)) {
      const auto extra = resolution_triples(ctx, *r, *ref.find(r->reference_id));
      out.triples.insert(out.triples.end(), extra.begin(), extra.end());
      out.resolutions.push_back(std::move(*r));
    }
  }
  return out;
}

template <class Fn>
void run_parallel(std::size_t n, unsigned workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (w == 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
}

}  // namespace

ObservationContext unify(std::shared_ptr<const EntityGraph> ref, std::vector<PersonalStream> streams,
                         const UnificationParams& params, const Alignment& alignment) {
  if (!ref) throw ValidationError("unify needs a reference graph");
  params.validate();
  const Interval& period = ref->box().period;
  std::set<int> users;
  for (const auto& s : streams) {
    if (s.period != period) {
      throw ValidationError(fmt::format("stream of user {} has period {} but the reference period is {}", s.userid,
                                        format_interval(s.period), format_interval(period)));
    }
    if (!users.insert(s.userid).second) throw ValidationError(fmt::format("two streams for user {}", s.userid));
  }

  ObservationContext obs;
  obs.reference = ref;
  obs.streams = std::move(streams);
  const SpatialIndex ix = index_entities(*ref, params.cell_size_m);

  std::vector<StreamOutcome> phase1(obs.streams.size());
  run_parallel(obs.streams.size(), params.workers,
               [&](std::size_t i) { phase1[i] = unify_stream(obs.streams[i], *ref, ix, params, alignment); });
  for (auto& o : phase1) {
    obs.derived.insert(obs.derived.end(), o.triples.begin(), o.triples.end());
    obs.resolutions.insert(obs.resolutions.end(), o.resolutions.begin(), o.resolutions.end());
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < obs.streams.size(); ++i)
    for (std::size_t j = i + 1; j < obs.streams.size(); ++j) pairs.emplace_back(i, j);
  std::vector<Coidentity> phase2(pairs.size());
  run_parallel(pairs.size(), params.workers, [&](std::size_t k) {
    phase2[k] = stu_coidentity(obs.streams[pairs[k].first], obs.streams[pairs[k].second], params);
  });
  for (auto& c : phase2) {
    obs.derived.insert(obs.derived.end(), c.triples.begin(), c.triples.end());
    if (c.same_entity) obs.coidentities.push_back(std::move(c));
  }

  std::sort(obs.derived.begin(), obs.derived.end(), triple_less);
  obs.derived.erase(std::unique(obs.derived.begin(), obs.derived.end()), obs.derived.end());
  obs.stats = compute_stats(obs);
  return obs;
}

json resolution_to_json(const Resolution& r) {
  return {{"userid", r.userid},
          {"center", format_timestamp(r.center)},
          {"anonymous_id", r.anonymous_id},
          {"reference_id", r.reference_id},
          {"distance_m", r.distance_m},
          {"interval", format_interval(r.interval)}};
}

void write_resolutions_jsonl(std::ostream& out, std::span<const Resolution> resolutions) {
  for (const auto& r : resolutions) out << resolution_to_json(r).dump() << '\n';
}

std::string serialize(const ObservationContext& obs) {
  std::ostringstream out;
  write_triples_jsonl(out, obs.derived);
  write_resolutions_jsonl(out, obs.resolutions);
  return out.str();
}

}  // namespace bigthick
