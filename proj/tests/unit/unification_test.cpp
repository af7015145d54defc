#include <gtest/gtest.h>

#include <fmt/core.h>

#include "bigthick/catalog.hpp"
#include "bigthick/error.hpp"
#include "bigthick/unification.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bigthick;

namespace {

const GeoPoint kCentre{46.0667, 11.1218};

struct Mini {
  std::shared_ptr<const EntityGraph> ref;
  Alignment alignment;
};

Mini mini(const std::vector<PlaceRecord>& places) {
  auto etg = std::make_shared<const Teleontology>(reference_etg());
  auto in = ingest_reference(places, BoundingBox{46.03, 46.10, 11.08, 11.16}, default_reference_period(), etg);
  return {std::make_shared<const EntityGraph>(std::move(in.graph)),
          epu_align(personal_etg(), reference_etg(), default_mapping(),
                    std::make_shared<const Teleontology>(reference_ktlo()))};
}

PlaceRecord place(std::string id, std::string fclass, GeoPoint at) {
  return PlaceRecord{std::move(id), std::nullopt, std::move(fclass), Point{at}, std::nullopt};
}

TimedPersonalContext context(int user, const char* at, const char* where, std::optional<GeoPoint> pos,
                             const char* who = "Friend(s)") {
  AnonymousIdSource ids(user_entity_id(user));
  const Timestamp t = parse_timestamp(at);
  return battery_to_context(QuestionBattery{user, t, std::string(where), "Eating", std::string(who), 3},
                            {t - 15 * kMinute, t + 15 * kMinute}, pos, ids);
}

}  // namespace

TEST(EpuAlign, RejectsUnknownNames) {
  MappingConfig m;
  m.etype_pairs = {{"Spaceport", "Bar"}};
  EXPECT_THROW(epu_align(personal_etg(), reference_etg(), m), ValidationError);
  m.etype_pairs = {{"Bar", "Spaceport"}};
  EXPECT_THROW(epu_align(personal_etg(), reference_etg(), m), ValidationError);
  m.etype_pairs = {};
  m.property_pairs = {{"Name", "Colour"}};
  EXPECT_THROW(epu_align(personal_etg(), reference_etg(), m), ValidationError);
  EXPECT_THROW(epu_align(personal_ktlo(), reference_etg(), {}), ValidationError);
}

TEST(EpuAlign, ReportsUnalignedEtypes) {
  const auto a = epu_align(personal_etg(), reference_etg(), default_mapping());
  const auto& up = a.unaligned_personal();
  EXPECT_NE(std::find(up.begin(), up.end(), "Transit"), up.end());
  EXPECT_NE(std::find(up.begin(), up.end(), "Person"), up.end());
  // Without the KTLO only exact pairs count.
  EXPECT_FALSE(a.compatible("Location", "Bank"));
}

TEST(StuNear, FindsPlacesWithinTheThreshold) {
  auto m = mini({place("a", "restaurant", offset_by(kCentre, 10, 0)), place("b", "bar", offset_by(kCentre, 45, 0)),
                 place("c", "bank", offset_by(kCentre, 60, 0))});
  const auto ix = index_entities(*m.ref);
  const auto ctx = context(1, "05-12 20:00:00", "Restaurant, pizzeria", kCentre);
  const auto near = stu_near(ctx, *m.ref, ix, {});
  ASSERT_EQ(near.places.size(), 2u);
  EXPECT_EQ(near.places[0].entity->id, "a");
  EXPECT_EQ(near.triples[0].subject, ctx.phone()->id);
  EXPECT_EQ(near.triples[0].validity, ctx.interval);
  EXPECT_EQ(near.triples[0].provenance, Provenance::Derived);
  EXPECT_TRUE(stu_near(context(1, "05-12 20:00:00", "Home", std::nullopt), *m.ref, ix, {}).places.empty());
}

TEST(EuResolve, ClosestCompatibleCandidateAndIdTieBreak) {
  auto m = mini({place("bar", "bar", offset_by(kCentre, 5, 0)), place("r2", "restaurant", offset_by(kCentre, 0, 20)),
                 place("r1", "restaurant", offset_by(kCentre, 0, -20))});
  const auto ix = index_entities(*m.ref);
  const auto ctx = context(1, "05-12 20:00:00", "Restaurant, pizzeria", kCentre);
  const auto near = stu_near(ctx, *m.ref, ix, {});
  const auto r = eu_resolve(ctx, near.places, m.alignment);
  ASSERT_TRUE(r);
  // The bar is closer but incompatible; r1 and r2 are equidistant up to rounding.
  EXPECT_TRUE(r->reference_id == "r1" || r->reference_id == "r2");
  std::vector<NearPlace> tied{{m.ref->find("r2"), 20.0}, {m.ref->find("r1"), 20.0}};
  EXPECT_EQ(eu_resolve(ctx, tied, m.alignment)->reference_id, "r1");
  EXPECT_FALSE(eu_resolve(context(1, "05-12 20:00:00", "On foot", kCentre), near.places, m.alignment));
}

TEST(ResolutionTriples, SameAsEtypeOfAndCompanion) {
  auto m = mini({place("r", "restaurant", kCentre)});
  const auto ctx = context(73, "05-12 20:00:00", "Restaurant, pizzeria", kCentre);
  const Resolution r{73, ctx.center, ctx.interval, ctx.place()->id, "r", 1.5};
  const auto ts = resolution_triples(ctx, r, *m.ref->find("r"));
  ASSERT_EQ(ts.size(), 3u);
  EXPECT_EQ(ts[0].predicate, "SameAs");
  EXPECT_EQ(ts[1].subject, "User73");
  EXPECT_EQ(ts[1].predicate, "RestaurantOf");
  EXPECT_EQ(ts[2].subject, ctx.companion()->id);
  for (const auto& t : ts) EXPECT_EQ(t.validity, ctx.interval);
}

TEST(StuCoidentity, IdenticalTracesAreTheSameEntity) {
  PersonalStream a{1, default_reference_period(), {}}, b{2, default_reference_period(), {}};
  for (int i = 0; i < 20; ++i) {
    const std::string at = fmt::format("05-12 {:02}:00:00", i);
    a.contexts.push_back(context(1, at.c_str(), "Home", kCentre));
    b.contexts.push_back(context(2, at.c_str(), "Home", kCentre));
  }
  const auto c = stu_coidentity(b, a, {});
  EXPECT_EQ(c.user_a, 1);
  EXPECT_EQ(c.overlaps, 20u);
  EXPECT_TRUE(c.same_entity);
  ASSERT_EQ(c.triples.size(), 1u);
  EXPECT_EQ(c.triples[0].predicate, "SameEntity");
  EXPECT_THROW(stu_coidentity(a, a, {}), ValidationError);
}

TEST(StuCoidentity, BriefMeetingGivesNear) {
  PersonalStream a{1, default_reference_period(), {}}, b{2, default_reference_period(), {}};
  a.contexts.push_back(context(1, "05-12 10:00:00", "Home", kCentre));
  a.contexts.push_back(context(1, "05-12 11:00:00", "Home", kCentre));
  b.contexts.push_back(context(2, "05-12 10:10:00", "Home", offset_by(kCentre, 20, 0)));
  b.contexts.push_back(context(2, "05-12 10:45:00", "Home", offset_by(kCentre, 2000, 0)));
  // Touching but not overlapping.
  b.contexts.push_back(context(2, "05-12 11:30:00", "Home", kCentre));
  const auto c = stu_coidentity(a, b, {});
  EXPECT_FALSE(c.same_entity);
  EXPECT_EQ(c.overlaps, 2u);
  ASSERT_EQ(c.triples.size(), 1u);
  EXPECT_EQ(c.triples[0].predicate, "Near");
  EXPECT_EQ(c.triples[0].validity->start, parse_timestamp("05-12 09:55:00"));
}

TEST(Unify, NoStreamsGivesZeroStats) {
  auto m = mini({place("r", "restaurant", kCentre)});
  const auto obs = unify(m.ref, {}, {}, m.alignment);
  EXPECT_TRUE(obs.derived.empty());
  EXPECT_EQ(obs.stats.timed_contexts, 0u);
  EXPECT_EQ(obs.stats.unified_context_count, 0u);
  EXPECT_EQ(obs.stats.coverage_fraction, 0.0);
  EXPECT_EQ(obs.stats.reference_entities, 1u);
}

TEST(Unify, PeriodMismatchNamesThePeriod) {
  auto m = mini({place("r", "restaurant", kCentre)});
  PersonalStream s{1, Interval{parse_timestamp("05-01 00:00:00"), parse_timestamp("05-02 00:00:00")}, {}};
  try {
    unify(m.ref, {s}, {}, m.alignment);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("05-01 00:00:00/05-02 00:00:00"), std::string::npos);
  }
}

TEST(Unify, FivePlantedVisitsResolve) {
  SynthSpec spec;
  spec.n_places = 40;
  spec.n_participants = 1;
  spec.weeks = 1;
  spec.seed = 3;
  const auto places = gen_places(spec);
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < places.size() && targets.size() < 5; ++i)
    if (where_answer_for(places[i]) != "Other place") targets.push_back(i);
  ASSERT_EQ(targets.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    spec.visits.push_back({1, targets[k], parse_timestamp("05-10 08:00:00") + static_cast<std::int64_t>(k) * 6 * kHour, 8.0});
  }
  const auto w = fixture::build_world(spec);
  const auto obs = unify(w.reference, w.streams, {}, w.alignment);
  std::size_t hits = 0;
  for (const auto& truth : w.data.truth.resolutions)
    for (const auto& r : obs.resolutions)
      if (r.userid == truth.userid && r.center == truth.at && r.reference_id == truth.place_id) ++hits;
  EXPECT_EQ(hits, 5u);
  EXPECT_GE(obs.stats.derived_by_predicate.at("Near"), 5u);
  EXPECT_NEAR(obs.stats.coverage_fraction,
              static_cast<double>(obs.stats.unified_context_count) / static_cast<double>(w.streams[0].contexts.size()),
              1e-12);
}

TEST(Unify, MatchesBruteForceAndIsWorkerIndependent) {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const auto w = fixture::build_world(fixture::small_spec(seed));
    UnificationParams p;
    const std::string expected = serialize(oracle::brute_unify(w.reference, w.streams, p, w.alignment));
    for (unsigned workers : {1u, 3u}) {
      p.workers = workers;
      p.cell_size_m = workers == 1 ? 100.0 : 17.0;
      EXPECT_EQ(serialize(unify(w.reference, w.streams, p, w.alignment)), expected) << "seed " << seed;
    }
  }
}

TEST(Unify, EveryResolutionRespectsTheThreshold) {
  const auto w = fixture::build_world(fixture::small_spec(7));
  UnificationParams p;
  p.near_threshold_m = 35;
  const auto obs = unify(w.reference, w.streams, p, w.alignment);
  ASSERT_FALSE(obs.resolutions.empty());
  for (const auto& r : obs.resolutions) {
    const auto* ctx = obs.context_of(r);
    ASSERT_NE(ctx, nullptr);
    EXPECT_LE(geo_distance(*ctx->position, w.reference->find(r.reference_id)->position()), 35.0);
  }
}

TEST(UnificationParams, JsonAndValidation) {
  UnificationParams p;
  p.near_threshold_m = 40;
  p.workers = 2;
  const auto back = UnificationParams::from_json(p.to_json());
  EXPECT_EQ(back.near_threshold_m, 40);
  EXPECT_EQ(back.workers, 2u);
  EXPECT_THROW(UnificationParams::from_json({{"near_threshold_m", 0}}), ValidationError);
  EXPECT_THROW(UnificationParams::from_json({{"coidentity_min_overlap", 0}}), ValidationError);
}
