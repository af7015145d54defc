#include "bigthick/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <tuple>

#include <fmt/format.h>

#include "bigthick/error.hpp"

namespace bigthick {

using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Reference: return "reference";
    case Provenance::Personal: return "personal";
    case Provenance::Derived: return "derived";
  }
  return "?";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "reference") return Provenance::Reference;
  if (s == "personal") return Provenance::Personal;
  if (s == "derived") return Provenance::Derived;
  throw ValidationError(fmt::format("unknown provenance '{}'", s));
}

bool triple_less(const Triple& a, const Triple& b) {
  auto key = [](const Triple& t) {
    return std::tie(t.subject, t.predicate, t.object, t.object_is_literal, t.validity, t.provenance);
  };
  if (key(a) != key(b)) return key(a) < key(b);
  return a.distance_m < b.distance_m;
}

GeoPoint Entity::position() const { return geometries.empty() ? GeoPoint{} : centroid(geometries.front()); }

EntityGraph::EntityGraph(ReferenceBox box, std::shared_ptr<const Teleontology> etg)
    : box_(std::move(box)), etg_(std::move(etg)) {
  if (!box_.period.well_formed()) throw ValidationError("reference period is empty");
}

const Entity* EntityGraph::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &entities_[it->second];
}

void EntityGraph::add_entity(Entity e) {
  if (by_id_.contains(e.id)) throw ValidationError(fmt::format("duplicate entity id '{}'", e.id));
  by_id_.emplace(e.id, entities_.size());
  entities_.push_back(std::move(e));
}

void EntityGraph::add_triple(Triple t) {
  if (find(t.subject) == nullptr) {
    throw ValidationError(fmt::format("triple subject '{}' is not an entity of the graph", t.subject));
  }
  if (!t.object_is_literal && find(t.object) == nullptr) {
    throw ValidationError(fmt::format("triple object '{}' is not an entity of the graph", t.object));
  }
  if (t.validity && !t.validity->well_formed()) throw ValidationError("triple validity ends before it starts");
  triples_.push_back(std::move(t));
}

void EntityGraph::canonicalize() {
  std::sort(triples_.begin(), triples_.end(), triple_less);
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
}

json triple_to_json(const Triple& t) {
  json j = {{"s", t.subject},
            {"p", t.predicate},
            {"o", t.object},
            {"literal", t.object_is_literal},
            {"validity", t.validity ? json(format_interval(*t.validity)) : json(nullptr)},
            {"provenance", to_string(t.provenance)}};
  if (t.distance_m) j["distance_m"] = *t.distance_m;
  return j;
}

Triple triple_from_json(const json& j) {
  Triple t;
  t.subject = j.at("s").get<std::string>();
  t.predicate = j.at("p").get<std::string>();
  t.object = j.at("o").get<std::string>();
  t.object_is_literal = j.value("literal", false);
  if (j.contains("validity") && j["validity"].is_string()) t.validity = parse_interval(j["validity"].get<std::string>());
  t.provenance = parse_provenance(j.value("provenance", "reference"));
  if (j.contains("distance_m")) t.distance_m = j["distance_m"].get<double>();
  return t;
}

json entity_to_json(const Entity& e) {
  json geom = json::array();
  for (const auto& g : e.geometries) geom.push_back(geometry_to_wkt(g));
  return {{"id", e.id},
          {"etype", e.etype},
          {"name", e.name ? json(*e.name) : json(nullptr)},
          {"class", e.cls},
          {"geom", std::move(geom)},
          {"properties", e.properties}};
}

Entity entity_from_json(const json& j) {
  Entity e;
  e.id = j.at("id").get<std::string>();
  e.etype = j.at("etype").get<std::string>();
  if (j.contains("name") && j["name"].is_string()) e.name = j["name"].get<std::string>();
  e.cls = j.at("class").get<std::string>();
  for (const auto& g : j.value("geom", json::array())) e.geometries.push_back(parse_wkt(g.get<std::string>()));
  if (j.contains("properties")) e.properties = j["properties"].get<std::map<std::string, std::string>>();
  return e;
}

namespace {

std::string coords(const std::vector<GeoPoint>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format("{} {}", pts[i].lon, pts[i].lat);
    if (pts[i].alt) out += fmt::format(" {}", *pts[i].alt);
  }
  return out;
}

class WktReader {
 public:
  explicit WktReader(std::string_view s) : s_(s) {}

  std::string keyword() {
    skip_ws();
    std::string kw;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      kw += static_cast<char>(std::toupper(static_cast<unsigned char>(s_[pos_++])));
    }
    // "POINT Z (...)"
    skip_ws();
    if (pos_ < s_.size() && (s_[pos_] == 'Z' || s_[pos_] == 'z')) ++pos_;
    return kw;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<GeoPoint> point_list() {
    expect('(');
    std::vector<GeoPoint> pts;
    do {
      pts.push_back(point());
    } while (accept(','));
    expect(')');
    return pts;
  }

  GeoPoint point() {
    GeoPoint p;
    p.lon = number();
    p.lat = number();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')') p.alt = number();
    return p;
  }

  void finish() {
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(fmt::format("malformed WKT '{}': {}", s_, what));
  }

 private:
  double number() {
    skip_ws();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string geometry_to_wkt(const Geometry& g) {
  return std::visit(
      [](const auto& geom) -> std::string {
        using T = std::decay_t<decltype(geom)>;
        if constexpr (std::is_same_v<T, Point>) {
          return "POINT (" + coords({geom.at}) + ")";
        } else if constexpr (std::is_same_v<T, Polyline>) {
          return "LINESTRING (" + coords(geom.points) + ")";
        } else {
          return "POLYGON ((" + coords(geom.ring) + "))";
        }
      },
      g);
}

Geometry parse_wkt(std::string_view wkt) {
  WktReader r(wkt);
  const std::string kw = r.keyword();
  Geometry g;
  if (kw == "POINT") {
    r.expect('(');
    g = Point{r.point()};
    r.expect(')');
  } else if (kw == "LINESTRING") {
    g = Polyline{r.point_list()};
  } else if (kw == "POLYGON") {
    r.expect('(');
    Polygon poly{r.point_list()};
    while (r.accept(',')) r.point_list();  // holes are ignored
    r.expect(')');
    g = std::move(poly);
  } else {
    r.fail("unsupported geometry type");
  }
  r.finish();
  validate(g);
  return g;
}

}  // namespace bigthick
