#include "bigthick/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "bigthick/error.hpp"

namespace bigthick {

using nlohmann::json;

namespace {

struct FclassWeight {
  const char* fclass;
  const char* title;
  double weight;
};

constexpr FclassWeight kFclasses[] = {
    {"building", "Building", 30},     {"restaurant", "Restaurant", 8}, {"fast_food", "Fast food", 3},
    {"bar", "Bar", 6},                {"cafe", "Cafe", 5},             {"supermarket", "Supermarket", 5},
    {"convenience", "Market", 3},     {"bank", "Bank", 4},             {"library", "Library", 2},
    {"university", "University", 2}, {"school", "School", 3},         {"sports_centre", "Sports centre", 3},
    {"park", "Park", 5},              {"bus_stop", "Bus stop", 8},     {"monument", "Monument", 3},
};

constexpr const char* kBuildingTypes[] = {"apartments", "house", "residential", "church", "office"};
constexpr double kBuildingTypeWeights[] = {30, 25, 20, 10, 15};

constexpr const char* kResidential[] = {"apartments", "house", "residential"};

bool is_residential(const std::optional<std::string>& type) {
  return type && std::find(std::begin(kResidential), std::end(kResidential), *type) != std::end(kResidential);
}

constexpr double kMargin = 0.0005;  // degrees kept free along the bbox edge

GeoPoint uniform_point(std::mt19937_64& rng, const BoundingBox& b) {
  std::uniform_real_distribution<double> lat(b.min_lat + kMargin, b.max_lat - kMargin);
  std::uniform_real_distribution<double> lon(b.min_lon + kMargin, b.max_lon - kMargin);
  const double la = lat(rng);
  return GeoPoint{la, lon(rng), std::nullopt};
}

GeoPoint jittered(std::mt19937_64& rng, const GeoPoint& p, double radius_m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius_m * std::sqrt(u(rng));
  const double a = 2.0 * std::numbers::pi * u(rng);
  return offset_by(p, r * std::cos(a), r * std::sin(a));
}

std::vector<Timestamp> battery_grid(const SynthSpec& spec) {
  const Interval period = spec.period();
  std::vector<Timestamp> out;
  for (Timestamp t = period.start + spec.schedule.spacing_at(period, period.start) / 2; t <= period.end;
       t = t + spec.schedule.spacing_at(period, t)) {
    out.push_back(t);
  }
  return out;
}

struct Pin {
  Interval when;
  GeoPoint where;
};

std::string pick(std::mt19937_64& rng, const std::vector<std::string>& from) {
  return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
}

}  // namespace

void SynthSpec::validate() const {
  if (!bbox.valid() || bbox.max_lat - bbox.min_lat <= 2 * kMargin || bbox.max_lon - bbox.min_lon <= 2 * kMargin) {
    throw ValidationError("synthetic bbox is empty or too small");
  }
  if (weeks <= 0) throw ValidationError("weeks must be positive");
  if (!(max_jitter_m >= 0.0)) throw ValidationError("max_jitter_m must not be negative");
  if (!(step_sigma_m >= 0.0) || !(gps_noise_m >= 0.0)) throw ValidationError("noise levels must not be negative");
  if (home_pull < 0.0 || home_pull > 1.0) throw ValidationError("home_pull must lie in [0, 1]");
  if (gps_period_s <= 0 || hold_s <= 0) throw ValidationError("gps_period_s and hold_s must be positive");
  if (unanswered_rate < 0.0 || unanswered_rate > 1.0) throw ValidationError("unanswered_rate must lie in [0, 1]");
  if (polygon_rate < 0.0 || polygon_rate > 1.0) throw ValidationError("polygon_rate must lie in [0, 1]");
  for (auto s : schedule.spacing_s)
    if (s <= 0) throw ValidationError("question spacing must be positive");
  if (schedule.spacing_s.empty()) throw ValidationError("question schedule is empty");
}

SynthSpec SynthSpec::from_json(const json& j) {
  SynthSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.n_places = j.value("n_places", s.n_places);
    s.n_participants = j.value("n_participants", s.n_participants);
    s.first_userid = j.value("first_userid", s.first_userid);
    if (j.contains("bbox")) {
      const auto& b = j["bbox"];
      s.bbox = {b.at("min_lat").get<double>(), b.at("max_lat").get<double>(), b.at("min_lon").get<double>(),
                b.at("max_lon").get<double>()};
    }
    if (j.contains("start")) s.start = parse_timestamp(j["start"].get<std::string>());
    s.weeks = j.value("weeks", s.weeks);
    if (j.contains("spacing_minutes")) {
      s.schedule.spacing_s.clear();
      for (auto m : j["spacing_minutes"]) s.schedule.spacing_s.push_back(m.get<std::int64_t>() * kMinute);
    }
    s.random_visits = j.value("random_visits", s.random_visits);
    s.random_colocations = j.value("random_colocations", s.random_colocations);
    s.max_jitter_m = j.value("max_jitter_m", s.max_jitter_m);
    for (const auto& v : j.value("visits", json::array())) {
      s.visits.push_back({v.at("userid").get<int>(), v.at("place_index").get<std::size_t>(),
                          parse_timestamp(v.at("at").get<std::string>()), v.value("jitter_m", 8.0)});
    }
    for (const auto& c : j.value("colocations", json::array())) {
      s.colocations.push_back(
          {c.at("user_a").get<int>(), c.at("user_b").get<int>(), parse_timestamp(c.at("at").get<std::string>())});
    }
    s.step_sigma_m = j.value("step_sigma_m", s.step_sigma_m);
    s.gps_noise_m = j.value("gps_noise_m", s.gps_noise_m);
    s.home_pull = j.value("home_pull", s.home_pull);
    s.gps_period_s = j.value("gps_period_s", s.gps_period_s);
    s.hold_s = j.value("hold_s", s.hold_s);
    s.unanswered_rate = j.value("unanswered_rate", s.unanswered_rate);
    s.polygon_rate = j.value("polygon_rate", s.polygon_rate);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed synth config: {}", e.what()));
  }
  s.validate();
  return s;
}

json SynthSpec::to_json() const {
  json spacing = json::array();
  for (auto s : schedule.spacing_s) spacing.push_back(s / kMinute);
  json v = json::array();
  for (const auto& p : visits) {
    v.push_back({{"userid", p.userid}, {"place_index", p.place_index}, {"at", format_timestamp(p.at)},
                 {"jitter_m", p.jitter_m}});
  }
  json c = json::array();
  for (const auto& p : colocations) {
    c.push_back({{"user_a", p.user_a}, {"user_b", p.user_b}, {"at", format_timestamp(p.at)}});
  }
  return {{"seed", seed},
          {"n_places", n_places},
          {"n_participants", n_participants},
          {"first_userid", first_userid},
          {"bbox", {{"min_lat", bbox.min_lat}, {"max_lat", bbox.max_lat}, {"min_lon", bbox.min_lon},
                    {"max_lon", bbox.max_lon}}},
          {"start", format_timestamp(start)},
          {"weeks", weeks},
          {"spacing_minutes", spacing},
          {"random_visits", random_visits},
          {"random_colocations", random_colocations},
          {"max_jitter_m", max_jitter_m},
          {"visits", v},
          {"colocations", c},
          {"step_sigma_m", step_sigma_m},
          {"gps_noise_m", gps_noise_m},
          {"home_pull", home_pull},
          {"gps_period_s", gps_period_s},
          {"hold_s", hold_s},
          {"unanswered_rate", unanswered_rate},
          {"polygon_rate", polygon_rate}};
}

json GroundTruth::to_json() const {
  json r = json::array();
  for (const auto& e : resolutions) {
    r.push_back({{"userid", e.userid}, {"at", format_timestamp(e.at)}, {"place_id", e.place_id}});
  }
  json c = json::array();
  for (const auto& e : colocations) {
    c.push_back({{"user_a", e.user_a},
                 {"user_b", e.user_b},
                 {"at", format_timestamp(e.at)},
                 {"lat", e.where.lat},
                 {"lon", e.where.lon}});
  }
  return {{"resolutions", r}, {"colocations", c}, {"residential", residential}};
}

std::string where_answer_for(const PlaceRecord& place) {
  const std::string& f = place.fclass;
  if (f == "building") {
    if (is_residential(place.type)) return "Home";
    if (place.type == "office") return "Workplace";
    return "Other place";
  }
  if (f == "restaurant" || f == "fast_food") return "Restaurant, pizzeria";
  if (f == "bar" || f == "pub" || f == "cafe" || f == "biergarten") return "Bar, pub, etc.";
  if (f == "supermarket" || f == "convenience") return "Shop, supermarket, etc.";
  if (f == "bank") return "Bank, post office";
  if (f == "library") return "University Library";
  if (f == "university" || f == "college") return "Classroom / Study hall";
  if (f == "sports_centre" || f == "pitch" || f == "swimming_pool") return "Gym, sport facility";
  if (f == "park") return "Outdoors";
  return "Other place";
}

std::vector<PlaceRecord> gen_places(const SynthSpec& spec, GroundTruth* truth) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<double> weights;
  for (const auto& f : kFclasses) weights.push_back(f.weight);
  std::discrete_distribution<std::size_t> fclass(weights.begin(), weights.end());
  std::discrete_distribution<std::size_t> btype(std::begin(kBuildingTypeWeights), std::end(kBuildingTypeWeights));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> side(10.0, 25.0);

  std::vector<PlaceRecord> out;
  out.reserve(spec.n_places);
  for (std::size_t i = 0; i < spec.n_places; ++i) {
    const FclassWeight& f = kFclasses[fclass(rng)];
    PlaceRecord p;
    p.id = fmt::format("p{:05d}", i);
    p.fclass = f.fclass;
    const GeoPoint c = uniform_point(rng, spec.bbox);
    p.geometry = Point{c};
    if (p.fclass == "building") {
      p.type = kBuildingTypes[btype(rng)];
      if (u(rng) < 0.3) p.name = fmt::format("{} {}", f.title, i);
      if (u(rng) < spec.polygon_rate) {
        const double h = side(rng) / 2.0;
        p.geometry = make_ring({offset_by(c, -h, -h), offset_by(c, h, -h), offset_by(c, h, h), offset_by(c, -h, h)});
      }
      if (truth) truth->residential[p.id] = is_residential(p.type);
    } else {
      p.name = fmt::format("{} {}", f.title, i);
    }
    out.push_back(std::move(p));
  }
  return out;
}

void gen_participants(const SynthSpec& spec, SynthData& data) {
  spec.validate();
  const Interval period = spec.period();
  const std::vector<Timestamp> grid = battery_grid(spec);
  const int last_user = spec.first_userid + static_cast<int>(spec.n_participants) - 1;
  auto known_user = [&](int u) { return u >= spec.first_userid && u <= last_user; };
  auto snap = [&](Timestamp t) {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.end()) return grid.back();
    if (it != grid.begin() && t - *std::prev(it) <= *it - t) --it;
    return *it;
  };

  std::map<int, std::vector<Pin>> pins;
  auto free_at = [&](int user, const Interval& w) {
    // Pins of one user keep a full hold apart so position windows never mix.
    const Interval guard{w.start - spec.hold_s, w.end + spec.hold_s};
    for (const auto& p : pins[user])
      if (p.when.overlaps(guard)) return false;
    return true;
  };
  auto window = [&](Timestamp t) { return Interval{t - spec.hold_s, t + spec.hold_s}; };

  std::map<std::pair<int, Timestamp>, std::size_t> visit_at;  // -> place index
  std::map<std::pair<int, Timestamp>, int> coloc_at;          // -> partner
  std::mt19937_64 plant_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);

  auto add_visit = [&](const PlantedVisit& v, bool strict) {
    if (!known_user(v.userid)) throw ValidationError(fmt::format("planted visit names unknown user {}", v.userid));
    if (v.place_index >= data.places.size()) {
      throw ValidationError(fmt::format("planted visit names place index {} of {}", v.place_index, data.places.size()));
    }
    if (!period.contains(v.at)) {
      throw ValidationError(fmt::format("planted visit at {} lies outside the period {}", format_timestamp(v.at),
                                        format_interval(period)));
    }
    if (v.jitter_m < 0.0) throw ValidationError("planted visit jitter must not be negative");
    const Timestamp t = snap(v.at);
    const Interval w = window(t);
    if (!free_at(v.userid, w)) {
      if (strict) {
        throw ValidationError(
            fmt::format("planted visit of user {} at {} overlaps another plant", v.userid, format_timestamp(t)));
      }
      return false;
    }
    const PlaceRecord& place = data.places[v.place_index];
    pins[v.userid].push_back({w, jittered(plant_rng, centroid(place.geometry), v.jitter_m)});
    visit_at[{v.userid, t}] = v.place_index;
    data.truth.resolutions.push_back({v.userid, t, place.id});
    return true;
  };
  auto add_colocation = [&](const PlantedColocation& c, bool strict) {
    if (!known_user(c.user_a) || !known_user(c.user_b) || c.user_a == c.user_b) {
      throw ValidationError(fmt::format("planted co-location needs two known users, got {} and {}", c.user_a, c.user_b));
    }
    if (!period.contains(c.at)) {
      throw ValidationError(fmt::format("planted co-location at {} lies outside the period {}", format_timestamp(c.at),
                                        format_interval(period)));
    }
    const Timestamp t = snap(c.at);
    const Interval w = window(t);
    if (!free_at(c.user_a, w) || !free_at(c.user_b, w)) {
      if (strict) {
        throw ValidationError(fmt::format("planted co-location of users {} and {} at {} overlaps another plant",
                                          c.user_a, c.user_b, format_timestamp(t)));
      }
      return false;
    }
    const GeoPoint where = uniform_point(plant_rng, spec.bbox);
    pins[c.user_a].push_back({w, where});
    pins[c.user_b].push_back({w, where});
    coloc_at[{c.user_a, t}] = c.user_b;
    coloc_at[{c.user_b, t}] = c.user_a;
    data.truth.colocations.push_back({std::min(c.user_a, c.user_b), std::max(c.user_a, c.user_b), t, where});
    return true;
  };

  for (const auto& v : spec.visits) add_visit(v, true);
  for (const auto& c : spec.colocations) add_colocation(c, true);

  // Random plants only target places with a specific diary answer, and stay
  // clear of the period edges so the whole stay is observed.
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < data.places.size(); ++i)
    if (where_answer_for(data.places[i]) != "Other place") targets.push_back(i);
  std::vector<Timestamp> inner;
  for (auto t : grid)
    if (period.contains(window(t))) inner.push_back(t);
  constexpr int kAttempts = 1000;
  if (spec.random_visits > 0 && (targets.empty() || inner.empty() || spec.n_participants == 0)) {
    throw ValidationError("random visits need participants, target places and room in the period");
  }
  std::uniform_int_distribution<int> any_user(spec.first_userid, std::max(spec.first_userid, last_user));
  for (std::size_t k = 0; k < spec.random_visits; ++k) {
    bool placed = false;
    for (int a = 0; a < kAttempts && !placed; ++a) {
      const std::size_t place = targets[std::uniform_int_distribution<std::size_t>(0, targets.size() - 1)(plant_rng)];
      const Timestamp t = inner[std::uniform_int_distribution<std::size_t>(0, inner.size() - 1)(plant_rng)];
      const double jitter = std::uniform_real_distribution<double>(0.0, spec.max_jitter_m)(plant_rng);
      placed = add_visit({any_user(plant_rng), place, t, jitter}, false);
    }
    if (!placed) throw ValidationError("could not place every random visit without overlaps");
  }
  if (spec.random_colocations > 0 && (spec.n_participants < 2 || inner.empty())) {
    throw ValidationError("random co-locations need two participants and room in the period");
  }
  for (std::size_t k = 0; k < spec.random_colocations; ++k) {
    bool placed = false;
    for (int a = 0; a < kAttempts && !placed; ++a) {
      const int ua = any_user(plant_rng);
      const int ub = any_user(plant_rng);
      const Timestamp t = inner[std::uniform_int_distribution<std::size_t>(0, inner.size() - 1)(plant_rng)];
      if (ua != ub) placed = add_colocation({ua, ub, t}, false);
    }
    if (!placed) throw ValidationError("could not place every random co-location without overlaps");
  }

  const DiaryVocabulary vocab = DiaryVocabulary::standard();
  std::vector<std::string> where_labels, who_labels;
  for (const auto& [label, _] : vocab.where) where_labels.push_back(label);
  for (const auto& [label, _] : vocab.with_whom) who_labels.push_back(label);

  for (int user = spec.first_userid; user <= last_user; ++user) {
    std::seed_seq seq{static_cast<std::uint64_t>(spec.seed), std::uint64_t{2}, static_cast<std::uint64_t>(user)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> step(0.0, spec.step_sigma_m);
    std::normal_distribution<double> noise(0.0, spec.gps_noise_m);
    std::normal_distribution<double> alt_noise(0.0, 3.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> mood(1, 5);

    auto& mine = pins[user];
    std::sort(mine.begin(), mine.end(), [](const Pin& a, const Pin& b) { return a.when.start < b.when.start; });
    const GeoPoint home = uniform_point(rng, spec.bbox);
    GeoPoint pos = home;
    const double minutes = static_cast<double>(spec.gps_period_s) / kMinute;
    const double sigma_scale = std::sqrt(minutes);
    std::size_t next_pin = 0;
    for (Timestamp t = period.start; t <= period.end; t = t + spec.gps_period_s) {
      while (next_pin < mine.size() && mine[next_pin].when.end < t) ++next_pin;
      if (next_pin < mine.size() && mine[next_pin].when.contains(t)) {
        pos = mine[next_pin].where;
      } else {
        constexpr double kDeg = 180.0 / std::numbers::pi;
        const double north = (home.lat - pos.lat) / kDeg * kEarthRadiusMeters;
        const double east = (home.lon - pos.lon) / kDeg * kEarthRadiusMeters * std::cos(pos.lat / kDeg);
        const double pull = std::min(1.0, spec.home_pull * minutes);
        pos = offset_by(pos, pull * east + step(rng) * sigma_scale, pull * north + step(rng) * sigma_scale);
        pos.lat = std::clamp(pos.lat, spec.bbox.min_lat, spec.bbox.max_lat);
        pos.lon = std::clamp(pos.lon, spec.bbox.min_lon, spec.bbox.max_lon);
      }
      GeoPoint seen = offset_by(pos, noise(rng), noise(rng));
      seen.alt = std::round((200.0 + alt_noise(rng)) * 10.0) / 10.0;
      data.gps.push_back({user, t, seen});
    }

    for (Timestamp t : grid) {
      QuestionBattery b{user, t, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
      const bool draw_unanswered = u(rng) < spec.unanswered_rate;
      auto visit = visit_at.find({user, t});
      auto coloc = coloc_at.find({user, t});
      b.what = pick(rng, vocab.what);
      b.with_whom = pick(rng, who_labels);
      b.mood = mood(rng);
      b.where = pick(rng, where_labels);
      if (visit != visit_at.end()) {
        b.where = where_answer_for(data.places[visit->second]);
      } else if (coloc != coloc_at.end()) {
        b.with_whom = "Friend(s)";
      } else if (draw_unanswered) {
        b = QuestionBattery{user, t, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
      }
      data.batteries.push_back(std::move(b));
    }
  }
}

SynthData generate(const SynthSpec& spec) {
  SynthData d;
  d.region = spec.bbox;
  d.period = spec.period();
  d.places = gen_places(spec, &d.truth);
  gen_participants(spec, d);
  return d;
}

}  // namespace bigthick
