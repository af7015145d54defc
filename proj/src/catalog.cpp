#include "bigthick/catalog.hpp"

namespace bigthick {

namespace {

Etype child(std::string id, std::string parent, std::vector<DataProperty> data = {}) {
  std::string name = id;
  return Etype{std::move(id), std::move(name), std::move(parent), std::move(data), {}};
}

std::vector<std::string> ids_except_root(const Teleontology& t) {
  std::vector<std::string> out;
  for (const auto& e : t.etypes())
    if (e.id != t.root()) out.push_back(e.id);
  return out;
}

}  // namespace

Teleontology reference_ktlo() {
  std::vector<Etype> extra{
      child("Place", "Entity"),
      child("Facility", "Place"),
      child("Restaurant", "Facility"),
      child("Bar", "Facility"),
      child("Supermarket", "Facility"),
      child("Bank", "Facility"),
      child("Library", "Facility"),
      child("University", "Facility"),
      child("School", "Facility"),
      child("SportsCentre", "Facility"),
      child("Park", "Place"),
      child("BusStop", "Place"),
      child("Building", "Place", {{"Type", Datatype::String}}),
  };
  const std::map<std::string, std::string> fclass{
      {"restaurant", "Restaurant"},  {"fast_food", "Restaurant"},  {"bar", "Bar"},
      {"pub", "Bar"},                {"cafe", "Bar"},              {"biergarten", "Bar"},
      {"supermarket", "Supermarket"}, {"convenience", "Supermarket"}, {"bank", "Bank"},
      {"library", "Library"},        {"university", "University"}, {"college", "University"},
      {"school", "School"},          {"kindergarten", "School"},   {"sports_centre", "SportsCentre"},
      {"pitch", "SportsCentre"},     {"swimming_pool", "SportsCentre"}, {"park", "Park"},
      {"bus_stop", "BusStop"},       {"building", "Building"},
  };
  return ktlo_from_stlo(default_stlo(), extra).with_class_map(fclass);
}

Teleontology reference_etg() {
  const Teleontology k = reference_ktlo();
  return etg_from_ktlo(k, SelectionSpec{ids_except_root(k), {}});
}

Teleontology personal_ktlo() {
  std::vector<Etype> extra{
      child("Person", "Entity"),
      child("Phone", "Entity"),
      child("Location", "Entity"),
  };
  for (const char* id : {"Residence", "University", "Library", "Canteen", "Bar", "Restaurant", "Supermarket", "Bank",
                         "SportsCentre", "Workplace", "Outdoors", "Transit"}) {
    extra.push_back(child(id, "Location"));
  }
  return ktlo_from_stlo(default_stlo(), extra);
}

Teleontology personal_etg() {
  const Teleontology k = personal_ktlo();
  return etg_from_ktlo(k, SelectionSpec{ids_except_root(k), {}});
}

MappingConfig default_mapping() {
  MappingConfig m;
  m.etype_pairs = {
      {"Residence", "Building"},   {"Workplace", "Building"}, {"Restaurant", "Restaurant"},
      {"Canteen", "Restaurant"},   {"Bar", "Bar"},            {"Supermarket", "Supermarket"},
      {"Bank", "Bank"},            {"University", "University"}, {"Library", "Library"},
      {"SportsCentre", "SportsCentre"}, {"Outdoors", "Park"}, {"Location", "Place"},
  };
  m.property_pairs = {{"Name", "Name"}, {"Coordinates", "Coordinates"}};
  return m;
}

}  // namespace bigthick
