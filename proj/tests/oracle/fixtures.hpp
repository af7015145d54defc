#pragma once

#include <memory>
#include <random>
#include <vector>

#include "bigthick/catalog.hpp"
#include "bigthick/reference.hpp"
#include "bigthick/synth.hpp"
#include "bigthick/unification.hpp"

namespace fixture {

using namespace bigthick;

/// Synthetic data pushed through ingestion, ready for unify().
struct World {
  SynthData data;
  std::shared_ptr<const EntityGraph> reference;
  std::vector<PersonalStream> streams;
  Alignment alignment;
};

inline World build_world(const SynthData& data, double cell_size_m = kDefaultCellSizeMeters) {
  World w;
  w.data = data;
  auto etg = std::make_shared<const Teleontology>(reference_etg());
  auto ingest = ingest_reference(data.places, data.region, data.period, etg, "synthetic");
  w.reference = std::make_shared<const EntityGraph>(
      compute_near(compute_partin(std::move(ingest.graph)), kDefaultPlaceNearMeters, cell_size_m));
  w.streams = build_streams(data.batteries, data.gps, data.period);
  w.alignment = epu_align(personal_etg(), reference_etg(), default_mapping(),
                          std::make_shared<const Teleontology>(reference_ktlo()));
  return w;
}

inline World build_world(const SynthSpec& spec) { return build_world(generate(spec)); }

/// Small, dense instance: many places within matching range of the walkers.
inline SynthSpec small_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SynthSpec s;
  s.seed = seed;
  s.n_places = std::uniform_int_distribution<std::size_t>(5, 50)(rng);
  s.n_participants = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
  s.bbox = {46.060, 46.068, 11.110, 11.121};
  s.weeks = 1;
  s.random_visits = 6;
  s.random_colocations = 2;
  s.step_sigma_m = 15.0;
  return s;
}

}  // namespace fixture

namespace fixture {

/// Town with a restaurant named "Biba's" and a "Coop" supermarket 60 m away.
/// User73 eats at Biba's on a Saturday and shops at the Coop; User74 eats there
/// on a Sunday and User75 on a Wednesday.
inline World town_world() {
  SynthSpec spec;
  spec.seed = 73;
  spec.n_places = 80;
  spec.n_participants = 4;
  spec.first_userid = 73;
  spec.weeks = 2;
  SynthData data;
  data.region = spec.bbox;
  data.period = spec.period();
  data.places = gen_places(spec, &data.truth);
  const GeoPoint biba{46.0667, 11.1218};
  data.places.push_back(PlaceRecord{"biba", std::string("Biba's"), "restaurant", Point{biba}, std::nullopt});
  data.places.push_back(
      PlaceRecord{"coop", std::string("Coop"), "supermarket", Point{offset_by(biba, 60, 0)}, std::nullopt});
  const std::size_t ib = data.places.size() - 2, ic = data.places.size() - 1;
  spec.visits = {{73, ib, parse_timestamp("05-15 20:00:00"), 5.0},
                 {74, ib, parse_timestamp("05-16 13:00:00"), 5.0},
                 {73, ic, parse_timestamp("05-12 18:00:00"), 5.0},
                 {75, ib, parse_timestamp("05-12 20:00:00"), 5.0}};
  gen_participants(spec, data);
  return build_world(data);
}

}  // namespace fixture
