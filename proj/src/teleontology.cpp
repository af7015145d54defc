#include "bigthick/teleontology.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bigthick/error.hpp"

namespace bigthick {

using nlohmann::json;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::STLO: return "STLO";
    case Stage::KTLO: return "KTLO";
    case Stage::ETG: return "ETG";
  }
  return "?";
}

std::string_view to_string(Datatype d) {
  switch (d) {
    case Datatype::String: return "string";
    case Datatype::Integer: return "integer";
    case Datatype::Float: return "float";
    case Datatype::GeoPoint: return "geopoint";
    case Datatype::Interval: return "interval";
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  if (s == "STLO") return Stage::STLO;
  if (s == "KTLO") return Stage::KTLO;
  if (s == "ETG") return Stage::ETG;
  throw ValidationError(fmt::format("unknown teleontology stage '{}'", s));
}

Datatype parse_datatype(std::string_view s) {
  for (auto d : {Datatype::String, Datatype::Integer, Datatype::Float, Datatype::GeoPoint, Datatype::Interval}) {
    if (to_string(d) == s) return d;
  }
  throw ValidationError(fmt::format("unknown datatype '{}'", s));
}

bool PropertyClosure::has(std::string_view name) const {
  return std::any_of(data.begin(), data.end(), [&](const auto& p) { return p.name == name; }) ||
         std::any_of(object.begin(), object.end(), [&](const auto& p) { return p.name == name; });
}

Teleontology::Teleontology(Stage stage, std::string root, std::vector<Etype> etypes, SchemaBox box,
                           std::map<std::string, std::string> class_map)
    : stage_(stage),
      root_(std::move(root)),
      etypes_(std::move(etypes)),
      box_(std::move(box)),
      class_map_(std::move(class_map)) {
  validate();
}

void Teleontology::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& e : etypes_) {
    if (e.id.empty()) throw ValidationError("etype with empty id");
    if (!ids.insert(e.id).second) throw ValidationError(fmt::format("duplicate etype id '{}'", e.id));
  }
  for (const auto& e : etypes_) {
    if (e.parent) {
      if (stage_ == Stage::ETG) {
        throw ValidationError(fmt::format("ETG etype '{}' must not have a parent", e.id));
      }
      if (!ids.contains(*e.parent)) {
        throw ValidationError(fmt::format("etype '{}' has unknown parent '{}'", e.id, *e.parent));
      }
    }
    // Walking parents must terminate within |etypes| steps.
    const Etype* cur = &e;
    std::size_t steps = 0;
    while (cur->parent) {
      if (++steps > etypes_.size()) throw ValidationError(fmt::format("IsA cycle through etype '{}'", e.id));
      cur = find(*cur->parent);
    }
  }
  if (stage_ != Stage::ETG) {
    const Etype* r = find(root_);
    if (r == nullptr) throw ValidationError(fmt::format("root etype '{}' not found", root_));
    if (r->parent) throw ValidationError(fmt::format("root etype '{}' has a parent", root_));
    for (const auto& e : etypes_) {
      if (e.id != root_ && !e.parent) {
        throw ValidationError(fmt::format("etype '{}' is not connected to root '{}'", e.id, root_));
      }
    }
  }
  for (const auto& [fclass, etype] : class_map_) {
    if (!ids.contains(etype)) {
      throw ValidationError(fmt::format("class map sends '{}' to unknown etype '{}'", fclass, etype));
    }
  }
}

const Etype* Teleontology::find(std::string_view id) const {
  auto it = std::find_if(etypes_.begin(), etypes_.end(), [&](const Etype& e) { return e.id == id; });
  return it == etypes_.end() ? nullptr : &*it;
}

const Etype* Teleontology::find_by_name(std::string_view name) const {
  auto it = std::find_if(etypes_.begin(), etypes_.end(), [&](const Etype& e) { return e.name == name; });
  return it == etypes_.end() ? nullptr : &*it;
}

std::vector<std::string> Teleontology::ancestors(std::string_view id) const {
  std::vector<std::string> out;
  const Etype* cur = find(id);
  while (cur && cur->parent) {
    out.push_back(*cur->parent);
    cur = find(*cur->parent);
  }
  return out;
}

bool Teleontology::is_descendant(std::string_view id, std::string_view ancestor) const {
  const auto anc = ancestors(id);
  return std::find(anc.begin(), anc.end(), ancestor) != anc.end();
}

PropertyClosure Teleontology::closure(std::string_view id) const {
  PropertyClosure out;
  const Etype* self = find(id);
  if (self == nullptr) return out;
  // Root first so that nearer etypes overwrite farther ones.
  std::vector<const Etype*> chain{self};
  for (const auto& a : ancestors(id)) chain.push_back(find(a));
  std::reverse(chain.begin(), chain.end());

  auto put_data = [&](const DataProperty& p, const Etype& owner) {
    auto it = std::find_if(out.data.begin(), out.data.end(), [&](const auto& q) { return q.name == p.name; });
    if (it != out.data.end()) {
      if (!(*it == p)) spdlog::debug("etype '{}' shadows inherited property '{}'", owner.id, p.name);
      *it = p;
    } else {
      out.data.push_back(p);
    }
  };
  auto put_object = [&](const ObjectProperty& p, const Etype& owner) {
    auto it = std::find_if(out.object.begin(), out.object.end(), [&](const auto& q) { return q.name == p.name; });
    if (it != out.object.end()) {
      if (!(*it == p)) spdlog::debug("etype '{}' shadows inherited property '{}'", owner.id, p.name);
      *it = p;
    } else {
      out.object.push_back(p);
    }
  };
  for (const Etype* e : chain) {
    for (const auto& p : e->data_properties) put_data(p, *e);
    for (const auto& p : e->object_properties) put_object(p, *e);
  }
  return out;
}

Teleontology Teleontology::with_box(SchemaBox box) const {
  Teleontology t = *this;
  t.box_ = std::move(box);
  return t;
}

Teleontology Teleontology::with_class_map(std::map<std::string, std::string> class_map) const {
  return Teleontology(stage_, root_, etypes_, box_, std::move(class_map));
}

Teleontology default_stlo() {
  Etype object{"Object",
               "Object",
               std::nullopt,
               {{"Id", Datatype::String}, {"Coordinates", Datatype::GeoPoint}},
               {{"PartIn", "Object"}, {"SpatialRelation", "Object"}}};
  std::vector<Etype> etypes{std::move(object)};
  for (const char* child : {"Point", "Line", "Polygon"}) {
    etypes.push_back(Etype{child, child, std::string("Object"), {}, {}});
  }
  return Teleontology(Stage::STLO, "Object", std::move(etypes));
}

Teleontology ktlo_from_stlo(const Teleontology& stlo, const std::vector<Etype>& extra) {
  if (stlo.stage() != Stage::STLO) {
    throw ValidationError(fmt::format("expected an STLO, got {}", to_string(stlo.stage())));
  }
  const Etype* sroot = stlo.find(stlo.root());
  Etype entity{"Entity", "Entity", std::nullopt, sroot->data_properties, {}};
  for (const auto& p : sroot->object_properties) {
    entity.object_properties.push_back({p.name, "Entity"});
  }
  for (const char* name : {"Name", "Class", "Function", "Geometry"}) {
    entity.data_properties.push_back({name, Datatype::String});
  }

  std::vector<Etype> etypes{std::move(entity)};
  std::unordered_set<std::string> names{"Entity"};
  for (Etype e : extra) {
    if (!names.insert(e.name).second) throw ValidationError(fmt::format("duplicate etype name '{}'", e.name));
    if (!e.parent) e.parent = "Entity";
    etypes.push_back(std::move(e));
  }
  return Teleontology(Stage::KTLO, "Entity", std::move(etypes), stlo.box());
}

Teleontology etg_from_ktlo(const Teleontology& ktlo, const SelectionSpec& sel) {
  if (ktlo.stage() != Stage::KTLO) {
    throw ValidationError(fmt::format("expected a KTLO, got {}", to_string(ktlo.stage())));
  }
  if (sel.etypes.empty()) throw ValidationError("ETG selection is empty");
  for (const auto& [id, props] : sel.properties) {
    if (std::find(sel.etypes.begin(), sel.etypes.end(), id) == sel.etypes.end()) {
      throw ValidationError(fmt::format("property selection for unselected etype '{}'", id));
    }
  }

  std::vector<Etype> out;
  for (const auto& id : sel.etypes) {
    const Etype* src = ktlo.find(id);
    if (src == nullptr) throw ValidationError(fmt::format("selection references unknown etype '{}'", id));
    const PropertyClosure full = ktlo.closure(id);
    Etype e{src->id, src->name, std::nullopt, {}, {}};
    auto chosen = sel.properties.find(id);
    if (chosen == sel.properties.end()) {
      e.data_properties = full.data;
      e.object_properties = full.object;
    } else {
      for (const auto& name : chosen->second) {
        if (!full.has(name)) {
          throw ValidationError(fmt::format("etype '{}' has no property '{}'", id, name));
        }
      }
      for (const auto& p : full.data)
        if (chosen->second.contains(p.name)) e.data_properties.push_back(p);
      for (const auto& p : full.object)
        if (chosen->second.contains(p.name)) e.object_properties.push_back(p);
    }
    out.push_back(std::move(e));
  }

  std::map<std::string, std::string> class_map;
  for (const auto& [fclass, etype] : ktlo.class_map()) {
    if (std::find(sel.etypes.begin(), sel.etypes.end(), etype) != sel.etypes.end()) class_map[fclass] = etype;
  }
  return Teleontology(Stage::ETG, "", std::move(out), ktlo.box(), std::move(class_map));
}

Teleontology flatten(const Teleontology& t) {
  std::vector<Etype> out;
  for (const auto& e : t.etypes()) {
    const PropertyClosure c = t.closure(e.id);
    out.push_back(Etype{e.id, e.name, std::nullopt, c.data, c.object});
  }
  return Teleontology(Stage::ETG, t.stage() == Stage::ETG ? t.root() : "", std::move(out), t.box(), t.class_map());
}

namespace {

json bbox_json(const BoundingBox& b) {
  return {{"min_lat", b.min_lat}, {"max_lat", b.max_lat}, {"min_lon", b.min_lon}, {"max_lon", b.max_lon}};
}

}  // namespace

json to_json(const Teleontology& t) {
  json etypes = json::array();
  for (const auto& e : t.etypes()) {
    json data = json::array();
    for (const auto& p : e.data_properties) data.push_back({{"name", p.name}, {"datatype", to_string(p.type)}});
    json object = json::array();
    for (const auto& p : e.object_properties) object.push_back({{"name", p.name}, {"target", p.target}});
    etypes.push_back({{"id", e.id},
                      {"name", e.name},
                      {"parent", e.parent ? json(*e.parent) : json(nullptr)},
                      {"data_properties", std::move(data)},
                      {"object_properties", std::move(object)}});
  }
  json box = {{"label", t.box().label}};
  box["region"] = t.box().region ? bbox_json(*t.box().region) : json(nullptr);
  box["period"] = t.box().period ? json(format_interval(*t.box().period)) : json(nullptr);
  return {{"stage", to_string(t.stage())},
          {"root", t.root()},
          {"etypes", std::move(etypes)},
          {"box", std::move(box)},
          {"class_map", t.class_map()}};
}

Teleontology teleontology_from_json(const json& j) {
  try {
    std::vector<Etype> etypes;
    for (const auto& je : j.at("etypes")) {
      Etype e;
      e.id = je.at("id").get<std::string>();
      e.name = je.value("name", e.id);
      if (je.contains("parent") && !je["parent"].is_null()) e.parent = je["parent"].get<std::string>();
      for (const auto& p : je.value("data_properties", json::array())) {
        e.data_properties.push_back({p.at("name").get<std::string>(), parse_datatype(p.value("datatype", "string"))});
      }
      for (const auto& p : je.value("object_properties", json::array())) {
        e.object_properties.push_back({p.at("name").get<std::string>(), p.at("target").get<std::string>()});
      }
      etypes.push_back(std::move(e));
    }
    SchemaBox box;
    if (j.contains("box") && j["box"].is_object()) {
      const auto& jb = j["box"];
      box.label = jb.value("label", "");
      if (jb.contains("region") && jb["region"].is_object()) {
        const auto& r = jb["region"];
        box.region = BoundingBox{r.at("min_lat").get<double>(), r.at("max_lat").get<double>(),
                                 r.at("min_lon").get<double>(), r.at("max_lon").get<double>()};
      }
      if (jb.contains("period") && jb["period"].is_string()) box.period = parse_interval(jb["period"].get<std::string>());
    }
    std::map<std::string, std::string> class_map;
    if (j.contains("class_map")) class_map = j["class_map"].get<std::map<std::string, std::string>>();
    return Teleontology(parse_stage(j.at("stage").get<std::string>()), j.value("root", ""), std::move(etypes),
                        std::move(box), std::move(class_map));
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed teleontology file: {}", e.what()));
  }
}

}  // namespace bigthick
