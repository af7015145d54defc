#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bigthick/geo.hpp"
#include "bigthick/time.hpp"

namespace bigthick {

/// Schema stages: spatial (STLO), knowledge hierarchy (KTLO), flattened
/// entity-type graph (ETG).
enum class Stage { STLO, KTLO, ETG };

enum class Datatype { String, Integer, Float, GeoPoint, Interval };

std::string_view to_string(Stage s);
std::string_view to_string(Datatype d);
Stage parse_stage(std::string_view s);
Datatype parse_datatype(std::string_view s);

struct DataProperty {
  std::string name;
  Datatype type = Datatype::String;
  friend bool operator==(const DataProperty&, const DataProperty&) = default;
};

struct ObjectProperty {
  std::string name;
  std::string target;  // etype id
  friend bool operator==(const ObjectProperty&, const ObjectProperty&) = default;
};

struct Etype {
  std::string id;
  std::string name;
  std::optional<std::string> parent;
  std::vector<DataProperty> data_properties;
  std::vector<ObjectProperty> object_properties;
  friend bool operator==(const Etype&, const Etype&) = default;
};

/// Box metadata: the region and observation period the schema is about.
struct SchemaBox {
  std::string label;
  std::optional<BoundingBox> region;
  std::optional<Interval> period;
  friend bool operator==(const SchemaBox&, const SchemaBox&) = default;
};

/// Data and object properties of an etype after walking its ancestors.
struct PropertyClosure {
  std::vector<DataProperty> data;
  std::vector<ObjectProperty> object;
  std::size_t size() const { return data.size() + object.size(); }
  bool has(std::string_view name) const;
};

/// Immutable value once constructed; `validate()` runs from every factory.
class Teleontology {
 public:
  Teleontology() = default;
  Teleontology(Stage stage, std::string root, std::vector<Etype> etypes, SchemaBox box = {},
               std::map<std::string, std::string> class_map = {});

  Stage stage() const { return stage_; }
  const std::string& root() const { return root_; }
  const std::vector<Etype>& etypes() const { return etypes_; }
  const SchemaBox& box() const { return box_; }
  /// fclass -> etype id, the declarative projection used at ingestion.
  const std::map<std::string, std::string>& class_map() const { return class_map_; }

  const Etype* find(std::string_view id) const;
  const Etype* find_by_name(std::string_view name) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  /// Ancestors nearest first, excluding the etype itself.
  std::vector<std::string> ancestors(std::string_view id) const;
  bool is_descendant(std::string_view id, std::string_view ancestor) const;
  /// Own properties shadow inherited ones with the same name.
  PropertyClosure closure(std::string_view id) const;

  Teleontology with_box(SchemaBox box) const;
  Teleontology with_class_map(std::map<std::string, std::string> class_map) const;

  friend bool operator==(const Teleontology&, const Teleontology&) = default;

 private:
  void validate() const;

  Stage stage_ = Stage::ETG;
  std::string root_;
  std::vector<Etype> etypes_;
  SchemaBox box_;
  std::map<std::string, std::string> class_map_;
};

/// Which etypes and which of their (inherited) properties survive into an ETG.
/// An etype without an entry in `properties` keeps its whole closure.
struct SelectionSpec {
  std::vector<std::string> etypes;
  std::map<std::string, std::set<std::string>> properties;
};

/// Object root with Point/Line/Polygon, Id and Coordinates, PartIn and
/// SpatialRelation.
Teleontology default_stlo();

/// Entity root inheriting the STLO root's spatial properties plus Name, Class,
/// Function and Geometry. `extra` etypes without a parent hang under Entity.
Teleontology ktlo_from_stlo(const Teleontology& stlo, const std::vector<Etype>& extra);

/// Selects etypes, distributes inherited properties down and drops IsA links.
Teleontology etg_from_ktlo(const Teleontology& ktlo, const SelectionSpec& sel);

/// Property-distribution step alone: every etype receives its closure and
/// loses its parent. Idempotent.
Teleontology flatten(const Teleontology& t);

nlohmann::json to_json(const Teleontology& t);
Teleontology teleontology_from_json(const nlohmann::json& j);

}  // namespace bigthick
