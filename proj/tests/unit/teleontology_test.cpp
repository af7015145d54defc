#include <gtest/gtest.h>

#include "bigthick/catalog.hpp"
#include "bigthick/error.hpp"
#include "bigthick/teleontology.hpp"

using namespace bigthick;

TEST(Stlo, HasSpatialRootAndShapes) {
  const Teleontology s = default_stlo();
  EXPECT_EQ(s.stage(), Stage::STLO);
  EXPECT_EQ(s.root(), "Object");
  for (const char* id : {"Point", "Line", "Polygon"}) {
    EXPECT_TRUE(s.is_descendant(id, "Object"));
    EXPECT_TRUE(s.closure(id).has("Coordinates"));
    EXPECT_TRUE(s.closure(id).has("PartIn"));
  }
}

TEST(Ktlo, EntityInheritsSpatialProperties) {
  const Teleontology k = ktlo_from_stlo(default_stlo(), {Etype{"Restaurant", "Restaurant", std::nullopt, {}, {}}});
  EXPECT_EQ(k.stage(), Stage::KTLO);
  EXPECT_EQ(k.root(), "Entity");
  const auto c = k.closure("Restaurant");
  for (const char* p : {"Id", "Coordinates", "Name", "Class", "Function", "Geometry", "PartIn", "SpatialRelation"}) {
    EXPECT_TRUE(c.has(p)) << p;
  }
  EXPECT_EQ(k.ancestors("Restaurant"), std::vector<std::string>{"Entity"});
}

TEST(Ktlo, RejectsDuplicateAndUnknownParents) {
  EXPECT_THROW(ktlo_from_stlo(default_stlo(), {Etype{"Entity", "Entity", std::nullopt, {}, {}}}), ValidationError);
  EXPECT_THROW(ktlo_from_stlo(default_stlo(), {Etype{"A", "A", std::string("Nowhere"), {}, {}}}), ValidationError);
}

TEST(Teleontology, DetectsCycles) {
  std::vector<Etype> ets{{"Root", "Root", std::nullopt, {}, {}},
                         {"A", "A", std::string("B"), {}, {}},
                         {"B", "B", std::string("A"), {}, {}}};
  EXPECT_THROW(Teleontology(Stage::KTLO, "Root", ets), ValidationError);
}

TEST(Teleontology, OwnPropertyShadowsInherited) {
  std::vector<Etype> ets{{"Root", "Root", std::nullopt, {{"Size", Datatype::Integer}}, {}},
                         {"Kid", "Kid", std::string("Root"), {{"Size", Datatype::Float}}, {}}};
  const Teleontology t(Stage::KTLO, "Root", ets);
  const auto c = t.closure("Kid");
  ASSERT_EQ(c.data.size(), 1u);
  EXPECT_EQ(c.data[0].type, Datatype::Float);
}

TEST(Etg, SelectsEtypesAndDistributesProperties) {
  const Teleontology k = reference_ktlo();
  const Teleontology g = etg_from_ktlo(k, SelectionSpec{{"Restaurant", "Building"}, {{"Building", {"Name", "Type"}}}});
  EXPECT_EQ(g.stage(), Stage::ETG);
  ASSERT_EQ(g.etypes().size(), 2u);
  for (const auto& e : g.etypes()) EXPECT_FALSE(e.parent);
  EXPECT_TRUE(g.closure("Restaurant").has("Coordinates"));
  EXPECT_EQ(g.closure("Building").size(), 2u);
  // Class map entries survive only for selected etypes.
  EXPECT_EQ(g.class_map().at("restaurant"), "Restaurant");
  EXPECT_FALSE(g.class_map().contains("bank"));
}

TEST(Etg, SelectionErrors) {
  const Teleontology k = reference_ktlo();
  EXPECT_THROW(etg_from_ktlo(k, SelectionSpec{}), ValidationError);
  EXPECT_THROW(etg_from_ktlo(k, SelectionSpec{{"Casino"}, {}}), ValidationError);
  EXPECT_THROW(etg_from_ktlo(k, SelectionSpec{{"Bank"}, {{"Bank", {"Vault"}}}}), ValidationError);
  EXPECT_THROW(etg_from_ktlo(k, SelectionSpec{{"Bank"}, {{"Bar", {"Name"}}}}), ValidationError);
  EXPECT_THROW(etg_from_ktlo(default_stlo(), SelectionSpec{{"Point"}, {}}), ValidationError);
}

TEST(Flatten, IsIdempotentAndKeepsClosures) {
  for (const Teleontology& t : {reference_ktlo(), personal_ktlo(), default_stlo()}) {
    const Teleontology once = flatten(t);
    EXPECT_EQ(flatten(once), once);
    for (const auto& e : t.etypes()) EXPECT_EQ(once.closure(e.id).size(), t.closure(e.id).size()) << e.id;
  }
}

TEST(Teleontology, JsonRoundTrip) {
  for (const Teleontology& t : {reference_ktlo(), reference_etg(), personal_etg(), default_stlo()}) {
    EXPECT_EQ(teleontology_from_json(to_json(t)), t);
  }
  const Teleontology boxed = reference_etg().with_box(
      SchemaBox{"Trento", BoundingBox{46.03, 46.10, 11.08, 11.16}, default_reference_period()});
  EXPECT_EQ(teleontology_from_json(to_json(boxed)), boxed);
}

TEST(Catalog, MappingAlignsBuiltInSchemas) {
  const auto m = default_mapping();
  const auto a = epu_align(personal_etg(), reference_etg(), m, std::make_shared<const Teleontology>(reference_ktlo()));
  EXPECT_TRUE(a.compatible("Restaurant", "Restaurant"));
  EXPECT_TRUE(a.compatible("Canteen", "Restaurant"));
  EXPECT_TRUE(a.compatible("Residence", "Building"));
  EXPECT_FALSE(a.compatible("Residence", "Bank"));
  // "Other place" maps to the Place root, so every place qualifies.
  EXPECT_TRUE(a.compatible("Location", "Bank"));
  EXPECT_FALSE(a.compatible("Transit", "BusStop"));
  EXPECT_EQ(a.reference_property("Name"), "Name");
}
