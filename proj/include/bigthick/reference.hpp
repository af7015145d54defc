#pragma once

#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bigthick/graph.hpp"
#include "bigthick/spatial_index.hpp"

namespace bigthick {

/// Etype assigned to places whose fclass has no entry in the class map.
inline constexpr const char* kFallbackPlaceEtype = "Place";
/// Place-to-place Near threshold.
inline constexpr double kDefaultPlaceNearMeters = 100.0;

struct PlaceRecord {
  std::string id;
  std::optional<std::string> name;
  std::string fclass;
  Geometry geometry;
  std::optional<std::string> type;
};

struct ReferenceIngest {
  EntityGraph graph;
  std::size_t dropped_outside = 0;
  std::size_t defaulted_class = 0;
};

/// Lifts place records to entities of `etg`. Records with any vertex outside
/// `region` are dropped and counted. Throws ValidationError on duplicate ids,
/// a non-ETG schema or an empty period.
ReferenceIngest ingest_reference(const std::vector<PlaceRecord>& records, const BoundingBox& region,
                                 const Interval& period, std::shared_ptr<const Teleontology> etg,
                                 std::string label = "");

/// Adds PartIn(inner, outer) for every entity whose vertices all lie in a
/// polygon of another entity. Mutually containing pairs get no triple.
EntityGraph compute_partin(EntityGraph eg);

/// Adds Near(a, b) once per unordered pair (lower id first) with centroid
/// distance <= threshold.
EntityGraph compute_near(EntityGraph eg, double threshold_m = kDefaultPlaceNearMeters,
                         double cell_size_m = kDefaultCellSizeMeters);

/// Index over entity positions (centroids), slots in entity order.
SpatialIndex index_entities(const EntityGraph& eg, double cell_size_m = kDefaultCellSizeMeters);

/// CSV header: id,name,fclass,type,geometry_wkt
std::vector<PlaceRecord> read_places_csv(std::istream& in);
/// FeatureCollection with properties id, name, fclass, type.
std::vector<PlaceRecord> read_places_geojson(const nlohmann::json& fc);
std::vector<PlaceRecord> read_places_file(const std::string& path);
void write_places_csv(std::ostream& out, const std::vector<PlaceRecord>& records);

/// Line-delimited JSON, one object per line, in canonical order.
void write_entities_jsonl(std::ostream& out, const EntityGraph& eg);
void write_triples_jsonl(std::ostream& out, const std::vector<Triple>& triples);
std::vector<Entity> read_entities_jsonl(std::istream& in);
std::vector<Triple> read_triples_jsonl(std::istream& in);

}  // namespace bigthick
