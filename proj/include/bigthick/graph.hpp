#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bigthick/geo.hpp"
#include "bigthick/teleontology.hpp"
#include "bigthick/time.hpp"

namespace bigthick {

enum class Provenance { Reference, Personal, Derived };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

/// (subject, predicate, object) with optional validity. Reference triples are
/// time invariant and never carry a validity interval.
struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  bool object_is_literal = false;
  std::optional<Interval> validity;
  Provenance provenance = Provenance::Reference;
  std::optional<double> distance_m;

  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Strict weak order used for every deterministic triple listing.
bool triple_less(const Triple& a, const Triple& b);

struct Entity {
  std::string id;
  std::string etype;
  std::optional<std::string> name;
  std::string cls;
  std::vector<Geometry> geometries;
  std::map<std::string, std::string> properties;

  /// Centroid of the first geometry.
  GeoPoint position() const;
};

/// Region S, reference location label L_R and observation period.
struct ReferenceBox {
  std::string label;
  BoundingBox region;
  Interval period;
};

class EntityGraph {
 public:
  EntityGraph() = default;
  EntityGraph(ReferenceBox box, std::shared_ptr<const Teleontology> etg);

  const ReferenceBox& box() const { return box_; }
  const std::shared_ptr<const Teleontology>& etg() const { return etg_; }
  const std::vector<Entity>& entities() const { return entities_; }
  const std::vector<Triple>& triples() const { return triples_; }

  const Entity* find(std::string_view id) const;
  /// Throws ValidationError on duplicate id.
  void add_entity(Entity e);
  /// Throws ValidationError when an entity reference does not resolve.
  void add_triple(Triple t);
  /// Sorts triples with `triple_less` and removes duplicates.
  void canonicalize();

 private:
  ReferenceBox box_{};
  std::shared_ptr<const Teleontology> etg_;
  std::vector<Entity> entities_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<Triple> triples_;
};

nlohmann::json triple_to_json(const Triple& t);
Triple triple_from_json(const nlohmann::json& j);
nlohmann::json entity_to_json(const Entity& e);
Entity entity_from_json(const nlohmann::json& j);

std::string geometry_to_wkt(const Geometry& g);
/// POINT, LINESTRING and POLYGON (outer ring only), lon-lat order.
Geometry parse_wkt(std::string_view wkt);

}  // namespace bigthick
