#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace oracle {

namespace {

struct Vec3 {
  double x, y, z;
};

Vec3 unit(const GeoPoint& p) {
  const double la = p.lat * std::numbers::pi / 180.0, lo = p.lon * std::numbers::pi / 180.0;
  return {std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
}

}  // namespace

double chord_distance(const GeoPoint& a, const GeoPoint& b) {
  const Vec3 u = unit(a), v = unit(b);
  const double c = std::sqrt((u.x - v.x) * (u.x - v.x) + (u.y - v.y) * (u.y - v.y) + (u.z - v.z) * (u.z - v.z));
  return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, c / 2.0));
}

bool winding_inside(const GeoPoint& p, const std::vector<GeoPoint>& ring) {
  // x = lon, y = lat.
  int wn = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[i + 1];
    const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (p.lon - a.lon) * (b.lat - a.lat);
    const bool within_x = std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon);
    const bool within_y = std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
    if (cross == 0.0 && within_x && within_y) return true;
    if (a.lat <= p.lat) {
      if (b.lat > p.lat && cross > 0) ++wn;
    } else if (b.lat <= p.lat && cross < 0) {
      --wn;
    }
  }
  return wn != 0;
}

std::vector<std::string> scan_within(const std::vector<IndexedPoint>& pts, const GeoPoint& p, double radius) {
  std::vector<std::pair<double, std::string>> hits;
  for (const auto& q : pts) {
    const double d = geo_distance(p, q.at);
    if (d <= radius) hits.emplace_back(d, q.id);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::string> out;
  for (auto& h : hits) out.push_back(h.second);
  return out;
}

std::vector<int> naive_dbscan(const std::vector<GeoPoint>& pts, double eps, std::size_t min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (geo_distance(pts[i], pts[j]) <= eps) nb[i].push_back(j);
  constexpr int kUnset = -2;
  std::vector<int> label(n, kUnset);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnset) continue;
    if (nb[i].size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int c = next++;
    label[i] = c;
    std::vector<std::size_t> stack(nb[i].begin(), nb[i].end());
    while (!stack.empty()) {
      const std::size_t q = stack.back();
      stack.pop_back();
      if (label[q] == kNoise) label[q] = c;
      if (label[q] != kUnset) continue;
      label[q] = c;
      if (nb[q].size() >= min_pts) stack.insert(stack.end(), nb[q].begin(), nb[q].end());
    }
  }
  return label;
}

EnquiryResult nested_loop(const Enquiry& e, const std::vector<Fact>& facts) {
  const auto vars = e.variables();
  struct Row {
    const Fact* fact;
    std::string when;
  };
  std::vector<Row> admitted;
  for (const auto& f : facts)
    if (ObservationStore::admits(e, f)) admitted.push_back({&f, f.validity ? format_interval(*f.validity) : ""});

  std::vector<std::map<std::string, std::string>> partial{{}};
  for (const auto& p : e.patterns) {
    if (!p.predicate.is_variable() &&
        std::none_of(facts.begin(), facts.end(), [&](const Fact& f) { return f.predicate == p.predicate.text; })) {
      return EnquiryResult{};
    }
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& b : partial) {
      for (const auto& [f, when] : admitted) {
        if (p.time_var && !f->validity) continue;
        std::vector<std::pair<std::string, std::string>> fresh;
        bool ok = true;
        auto bind = [&](const std::string& term, const std::string& value) {
          if (!ok) return;
          if (!Term{term}.is_variable()) {
            ok = term == value;
          } else if (auto it = b.find(term); it != b.end()) {
            ok = it->second == value;
          } else {
            for (const auto& [k, v] : fresh)
              if (k == term) {
                ok = v == value;
                return;
              }
            fresh.emplace_back(term, value);
          }
        };
        bind(p.subject.text, f->subject);
        bind(p.predicate.text, f->predicate);
        bind(p.object.text, f->object);
        if (p.time_var) bind(*p.time_var, when);
        if (!ok) continue;
        auto m = b;
        m.insert(fresh.begin(), fresh.end());
        next.push_back(std::move(m));
      }
    }
    partial = std::move(next);
  }

  EnquiryResult r;
  std::vector<std::string> keep = e.select.empty() ? vars : e.select;
  if (e.select.empty() && e.count) keep.erase(std::remove(keep.begin(), keep.end(), *e.count), keep.end());
  r.columns = keep;
  std::set<std::vector<std::string>> rows;
  if (!e.count) {
    for (const auto& b : partial) {
      std::vector<std::string> row;
      for (const auto& v : keep) row.push_back(b.at(v));
      rows.insert(row);
    }
  } else {
    r.columns.push_back("count(" + *e.count + ")");
    std::map<std::vector<std::string>, std::set<std::string>> groups;
    for (const auto& b : partial) {
      std::vector<std::string> key;
      for (const auto& v : keep) key.push_back(b.at(v));
      groups[key].insert(b.at(*e.count));
    }
    if (groups.empty() && keep.empty()) groups[{}];
    for (const auto& [k, members] : groups) {
      auto row = k;
      row.push_back(std::to_string(members.size()));
      rows.insert(row);
    }
  }
  r.rows.assign(rows.begin(), rows.end());
  return r;
}

ObservationContext brute_unify(std::shared_ptr<const EntityGraph> ref, std::vector<PersonalStream> streams,
                               const UnificationParams& params, const Alignment& alignment) {
  ObservationContext obs;
  obs.reference = ref;
  obs.streams = std::move(streams);
  const auto& ents = ref->entities();

  for (const auto& s : obs.streams) {
    for (const auto& c : s.contexts) {
      if (!c.position) continue;
      std::vector<std::pair<double, std::size_t>> near;
      for (std::size_t k = 0; k < ents.size(); ++k) {
        const double d = geo_distance(*c.position, ents[k].position());
        if (d <= params.near_threshold_m) near.emplace_back(d, k);
      }
      std::sort(near.begin(), near.end(), [&](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : ents[a.second].id < ents[b.second].id;
      });
      if (near.empty()) continue;
      std::string phone = user_entity_id(c.userid);
      const AnonymousEntity* place = nullptr;
      const AnonymousEntity* person = nullptr;
      for (const auto& a : c.anonymous) {
        if (a.etype == "Phone") phone = a.id;
        else if (a.etype == "Person") person = person ? person : &a;
        else place = place ? place : &a;
      }
      for (const auto& [d, k] : near) {
        obs.derived.push_back({phone, "Near", ents[k].id, false, c.interval, Provenance::Derived, d});
      }
      if (place == nullptr) continue;
      for (const auto& [d, k] : near) {
        const Entity& e = ents[k];
        if (!alignment.compatible(place->etype, e.etype)) continue;
        if (params.name_prefilter && place->name && e.name != place->name) continue;
        obs.resolutions.push_back({c.userid, c.center, c.interval, place->id, e.id, d});
        obs.derived.push_back({place->id, "SameAs", e.id, false, c.interval, Provenance::Derived, d});
        obs.derived.push_back(
            {user_entity_id(c.userid), e.etype + "Of", e.id, false, c.interval, Provenance::Derived, std::nullopt});
        if (person) {
          obs.derived.push_back({person->id, "Near", e.id, false, c.interval, Provenance::Derived, std::nullopt});
        }
        break;
      }
    }
  }

  for (std::size_t i = 0; i < obs.streams.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.streams.size(); ++j) {
      const auto* a = &obs.streams[i];
      const auto* b = &obs.streams[j];
      if (a->userid > b->userid) std::swap(a, b);
      struct Pair {
        Interval shared;
        double d;
      };
      std::vector<Pair> pairs;
      for (const auto& x : a->contexts) {
        for (const auto& y : b->contexts) {
          if (!x.position || !y.position) continue;
          if (!(x.interval.start < y.interval.end && y.interval.start < x.interval.end)) continue;
          pairs.push_back({{std::max(x.interval.start, y.interval.start), std::min(x.interval.end, y.interval.end)},
                           geo_distance(*x.position, *y.position)});
        }
      }
      const std::string ua = user_entity_id(a->userid), ub = user_entity_id(b->userid);
      bool close = !pairs.empty() && pairs.size() >= params.coidentity_min_overlap;
      for (const auto& p : pairs) close = close && p.d <= params.coidentity_eps_m;
      if (close) {
        Interval span = pairs[0].shared;
        double worst = 0;
        for (const auto& p : pairs) {
          span.start = std::min(span.start, p.shared.start);
          span.end = std::max(span.end, p.shared.end);
          worst = std::max(worst, p.d);
        }
        obs.derived.push_back({ua, "SameEntity", ub, false, span, Provenance::Derived, worst});
        obs.coidentities.push_back({a->userid, b->userid, pairs.size(), true, {obs.derived.back()}});
      } else {
        for (const auto& p : pairs)
          if (p.d <= params.near_threshold_m) obs.derived.push_back({ua, "Near", ub, false, p.shared, Provenance::Derived, p.d});
      }
    }
  }
  std::sort(obs.derived.begin(), obs.derived.end(), triple_less);
  obs.derived.erase(std::unique(obs.derived.begin(), obs.derived.end()), obs.derived.end());
  obs.stats = compute_stats(obs);
  return obs;
}

}  // namespace oracle
