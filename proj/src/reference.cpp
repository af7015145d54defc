#include "bigthick/reference.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bigthick/csv.hpp"
#include "bigthick/error.hpp"

namespace bigthick {

using nlohmann::json;

namespace {

bool has_polygon(const Entity& e) {
  return std::any_of(e.geometries.begin(), e.geometries.end(),
                     [](const Geometry& g) { return std::holds_alternative<Polygon>(g); });
}

std::vector<GeoPoint> all_vertices(const Entity& e) {
  std::vector<GeoPoint> out;
  for (const auto& g : e.geometries) {
    auto v = vertices(g);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace

ReferenceIngest ingest_reference(const std::vector<PlaceRecord>& records, const BoundingBox& region,
                                 const Interval& period, std::shared_ptr<const Teleontology> etg,
                                 std::string label) {
  if (!etg || etg->stage() != Stage::ETG) throw ValidationError("reference ingestion requires an ETG schema");
  if (!period.well_formed() || period.length() <= 0) {
    throw ValidationError(fmt::format("reference period '{}' is empty", format_interval(period)));
  }
  if (!region.valid()) throw ValidationError("reference region is not a valid bounding box");

  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (r.id.empty()) throw ValidationError("place record with empty id");
    if (!seen.insert(r.id).second) throw ValidationError(fmt::format("duplicate place id '{}'", r.id));
  }

  ReferenceIngest out{EntityGraph(ReferenceBox{std::move(label), region, period}, etg)};
  for (const auto& r : records) {
    validate(r.geometry);
    const auto verts = vertices(r.geometry);
    if (!std::all_of(verts.begin(), verts.end(), [&](const GeoPoint& p) { return within_bbox(p, region); })) {
      ++out.dropped_outside;
      continue;
    }
    Entity e;
    e.id = r.id;
    e.name = r.name;
    e.cls = r.fclass;
    e.geometries = {r.geometry};
    if (r.type) e.properties["type"] = *r.type;
    if (auto it = etg->class_map().find(r.fclass); it != etg->class_map().end()) {
      e.etype = it->second;
    } else {
      if (!etg->contains(kFallbackPlaceEtype)) {
        throw ValidationError(fmt::format("fclass '{}' is unmapped and the ETG has no '{}' etype", r.fclass,
                                          kFallbackPlaceEtype));
      }
      e.etype = kFallbackPlaceEtype;
      ++out.defaulted_class;
    }
    if (e.cls.empty()) e.cls = e.etype;
    out.graph.add_entity(std::move(e));
  }
  if (out.dropped_outside > 0) spdlog::info("dropped {} place records outside the region", out.dropped_outside);
  if (out.defaulted_class > 0) {
    spdlog::info("{} place records had unmapped fclass and became '{}'", out.defaulted_class, kFallbackPlaceEtype);
  }
  return out;
}

SpatialIndex index_entities(const EntityGraph& eg, double cell_size_m) {
  std::vector<IndexedPoint> pts;
  pts.reserve(eg.entities().size());
  for (const auto& e : eg.entities()) pts.push_back({e.id, e.position()});
  return SpatialIndex::build(std::move(pts), eg.box().region, cell_size_m);
}

EntityGraph compute_partin(EntityGraph eg) {
  const auto& entities = eg.entities();
  if (entities.empty()) return eg;
  const SpatialIndex ix = index_entities(eg);

  std::vector<std::vector<GeoPoint>> verts;
  verts.reserve(entities.size());
  for (const auto& e : entities) verts.push_back(all_vertices(e));

  // contained[i] lists outer entity slots whose polygon holds every vertex of i.
  std::vector<std::vector<std::uint32_t>> contained(entities.size());
  for (std::uint32_t outer = 0; outer < entities.size(); ++outer) {
    if (!has_polygon(entities[outer])) continue;
    for (const auto& g : entities[outer].geometries) {
      const auto* poly = std::get_if<Polygon>(&g);
      if (poly == nullptr) continue;
      const GeoPoint c = centroid(g);
      double reach = 0.0;
      for (const auto& v : poly->ring) reach = std::max(reach, geo_distance(c, v));
      for (const auto& hit : ix.query_within(c, reach * 1.01 + 1.0)) {
        if (hit.slot == outer) continue;
        const auto& vs = verts[hit.slot];
        if (std::all_of(vs.begin(), vs.end(), [&](const GeoPoint& p) { return point_in_polygon(p, *poly); })) {
          auto& list = contained[hit.slot];
          if (std::find(list.begin(), list.end(), outer) == list.end()) list.push_back(outer);
        }
      }
    }
  }

  std::vector<Triple> added;
  for (std::uint32_t inner = 0; inner < entities.size(); ++inner) {
    for (std::uint32_t outer : contained[inner]) {
      const auto& back = contained[outer];
      if (std::find(back.begin(), back.end(), inner) != back.end()) continue;
      added.push_back(Triple{entities[inner].id, "PartIn", entities[outer].id, false, std::nullopt,
                             Provenance::Reference, std::nullopt});
    }
  }
  for (auto& t : added) eg.add_triple(std::move(t));
  eg.canonicalize();
  return eg;
}

EntityGraph compute_near(EntityGraph eg, double threshold_m, double cell_size_m) {
  if (!(threshold_m > 0.0)) throw ValidationError("near threshold must be positive");
  const SpatialIndex ix = index_entities(eg, cell_size_m);
  std::vector<Triple> added;
  for (std::uint32_t s = 0; s < ix.size(); ++s) {
    for (const auto& hit : ix.query_within(ix.point(s), threshold_m)) {
      if (ix.id(s) < ix.id(hit.slot)) {
        added.push_back(
            Triple{ix.id(s), "Near", ix.id(hit.slot), false, std::nullopt, Provenance::Reference, hit.distance_m});
      }
    }
  }
  for (auto& t : added) eg.add_triple(std::move(t));
  eg.canonicalize();
  return eg;
}

namespace {

std::optional<std::string> non_empty(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

Geometry geojson_geometry(const json& g) {
  const std::string type = g.at("type").get<std::string>();
  auto pt = [](const json& c) {
    GeoPoint p{c.at(1).get<double>(), c.at(0).get<double>(), std::nullopt};
    if (c.size() > 2) p.alt = c.at(2).get<double>();
    return p;
  };
  auto pts = [&](const json& arr) {
    std::vector<GeoPoint> out;
    for (const auto& c : arr) out.push_back(pt(c));
    return out;
  };
  Geometry geom;
  if (type == "Point") {
    geom = Point{pt(g.at("coordinates"))};
  } else if (type == "LineString") {
    geom = Polyline{pts(g.at("coordinates"))};
  } else if (type == "Polygon") {
    geom = Polygon{pts(g.at("coordinates").at(0))};
  } else {
    throw ValidationError(fmt::format("unsupported GeoJSON geometry type '{}'", type));
  }
  validate(geom);
  return geom;
}

std::optional<std::string> json_text(const json& props, const char* key) {
  if (!props.contains(key) || props[key].is_null()) return std::nullopt;
  if (props[key].is_string()) return non_empty(props[key].get<std::string>());
  return props[key].dump();
}

}  // namespace

std::vector<PlaceRecord> read_places_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const auto c_id = table.column("id");
  const auto c_name = table.column("name");
  const auto c_fclass = table.column("fclass");
  const auto c_type = table.column("type");
  const auto c_geom = table.column("geometry_wkt");
  std::vector<PlaceRecord> out;
  out.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    out.push_back(PlaceRecord{row[c_id], non_empty(row[c_name]), row[c_fclass], parse_wkt(row[c_geom]),
                              non_empty(row[c_type])});
  }
  return out;
}

std::vector<PlaceRecord> read_places_geojson(const json& fc) {
  std::vector<PlaceRecord> out;
  try {
    for (const auto& f : fc.at("features")) {
      const json props = f.value("properties", json::object());
      auto id = json_text(props, "id");
      if (!id) throw ValidationError("GeoJSON feature without properties.id");
      out.push_back(PlaceRecord{*id, json_text(props, "name"), json_text(props, "fclass").value_or(""),
                                geojson_geometry(f.at("geometry")), json_text(props, "type")});
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed GeoJSON: {}", e.what()));
  }
  return out;
}

std::vector<PlaceRecord> read_places_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path));
  const bool geojson = path.ends_with(".geojson") || path.ends_with(".json");
  if (geojson) {
    json fc;
    try {
      fc = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("malformed GeoJSON '{}': {}", path, e.what()));
    }
    return read_places_geojson(fc);
  }
  return read_places_csv(in);
}

void write_places_csv(std::ostream& out, const std::vector<PlaceRecord>& records) {
  csv::write_row(out, {"id", "name", "fclass", "type", "geometry_wkt"});
  for (const auto& r : records) {
    csv::write_row(out, {r.id, r.name.value_or(""), r.fclass, r.type.value_or(""), geometry_to_wkt(r.geometry)});
  }
}

void write_entities_jsonl(std::ostream& out, const EntityGraph& eg) {
  std::vector<const Entity*> sorted;
  for (const auto& e : eg.entities()) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const Entity* a, const Entity* b) { return a->id < b->id; });
  for (const Entity* e : sorted) out << entity_to_json(*e).dump() << '\n';
}

void write_triples_jsonl(std::ostream& out, const std::vector<Triple>& triples) {
  for (const auto& t : triples) out << triple_to_json(t).dump() << '\n';
}

std::vector<Entity> read_entities_jsonl(std::istream& in) {
  std::vector<Entity> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(entity_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("malformed entity line: {}", e.what()));
    }
  }
  return out;
}

std::vector<Triple> read_triples_jsonl(std::istream& in) {
  std::vector<Triple> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(triple_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("malformed triple line: {}", e.what()));
    }
  }
  return out;
}

}  // namespace bigthick
