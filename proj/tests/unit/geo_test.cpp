#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bigthick/error.hpp"
#include "bigthick/geo.hpp"
#include "bigthick/graph.hpp"
#include "oracles.hpp"

using namespace bigthick;

TEST(GeoDistance, OneDegreeOfLatitude) {
  // Arc length of one degree on the model sphere.
  const double expected = 2.0 * std::numbers::pi * kEarthRadiusMeters / 360.0;
  EXPECT_NEAR(geo_distance({46.0, 11.0}, {47.0, 11.0}), expected, 1e-6);
  EXPECT_NEAR(geo_distance({0.0, 0.0}, {0.0, 1.0}), expected, 1e-6);
}

TEST(GeoDistance, ZeroAndSymmetry) {
  const GeoPoint a{46.07, 11.12}, b{46.08, 11.13};
  EXPECT_EQ(geo_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(geo_distance(a, b), geo_distance(b, a));
}

TEST(GeoDistance, AgreesWithChordFormulaOnRandomPairs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180), small(-0.01, 0.01);
  for (int i = 0; i < 5000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)};
    const GeoPoint far{lat(rng), lon(rng)};
    const GeoPoint near{a.lat + small(rng), a.lon + small(rng)};
    EXPECT_NEAR(geo_distance(a, far), oracle::chord_distance(a, far), 1e-3);
    EXPECT_NEAR(geo_distance(a, near), oracle::chord_distance(a, near), 1e-6);
  }
}

TEST(Bbox, BoundaryIsInside) {
  const BoundingBox b{46.0, 46.1, 11.0, 11.2};
  EXPECT_TRUE(within_bbox({46.0, 11.0}, b));
  EXPECT_TRUE(within_bbox({46.1, 11.2}, b));
  EXPECT_FALSE(within_bbox({46.1000001, 11.1}, b));
  EXPECT_FALSE(within_bbox({46.05, 10.9999}, b));
}

TEST(PointInPolygon, SquareInteriorEdgeVertexOutside) {
  const Polygon sq = make_ring({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  EXPECT_TRUE(point_in_polygon({0.5, 0.5}, sq));
  EXPECT_TRUE(point_in_polygon({0.0, 0.5}, sq));
  EXPECT_TRUE(point_in_polygon({1.0, 1.0}, sq));
  EXPECT_FALSE(point_in_polygon({1.5, 0.5}, sq));
  EXPECT_FALSE(point_in_polygon({-0.0001, 0.5}, sq));
}

TEST(PointInPolygon, RejectsBadRings) {
  EXPECT_THROW(point_in_polygon({0, 0}, Polygon{{{0, 0}, {1, 1}, {0, 0}}}), ValidationError);
  EXPECT_THROW(point_in_polygon({0, 0}, Polygon{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}), ValidationError);
  EXPECT_THROW(point_in_polygon({0, 0}, make_ring({{0, 0}, {1, 1}, {2, 2}})), ValidationError);
}

TEST(PointInPolygon, MatchesWindingNumberOnRandomStarPolygons) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(0.2, 1.0), u(-1.2, 1.2);
  for (int poly = 0; poly < 200; ++poly) {
    const int n = 3 + poly % 12;
    std::vector<GeoPoint> open;
    for (int k = 0; k < n; ++k) {
      const double a = 2 * std::numbers::pi * k / n;
      const double rad = r(rng);
      open.push_back({rad * std::sin(a), rad * std::cos(a)});
    }
    const Polygon p = make_ring(open);
    for (int q = 0; q < 200; ++q) {
      const GeoPoint x{u(rng), u(rng)};
      EXPECT_EQ(point_in_polygon(x, p), oracle::winding_inside(x, p.ring)) << "polygon " << poly;
    }
    // Every vertex is on the boundary.
    for (const auto& v : open) EXPECT_TRUE(point_in_polygon(v, p));
  }
}

TEST(Centroid, PolygonAndPolyline) {
  const GeoPoint c = centroid(make_ring({{0, 0}, {0, 2}, {2, 2}, {2, 0}}));
  EXPECT_NEAR(c.lat, 1.0, 1e-12);
  EXPECT_NEAR(c.lon, 1.0, 1e-12);
  const GeoPoint m = centroid(Polyline{{{0, 0}, {0, 2}}});
  EXPECT_NEAR(m.lon, 1.0, 1e-12);
}

TEST(OffsetBy, MovesTheRequestedDistance) {
  const GeoPoint p{46.07, 11.12};
  EXPECT_NEAR(geo_distance(p, offset_by(p, 30.0, 0.0)), 30.0, 1e-3);
  EXPECT_NEAR(geo_distance(p, offset_by(p, 0.0, -25.0)), 25.0, 1e-3);
  EXPECT_NEAR(geo_distance(p, offset_by(p, 3.0, 4.0)), 5.0, 1e-3);
}

TEST(Wkt, RoundTripsEveryGeometryKind) {
  const std::vector<Geometry> shapes{Point{{46.07, 11.12, 200.5}}, Polyline{{{46.0, 11.0}, {46.01, 11.02}}},
                                     make_ring({{46.0, 11.0}, {46.0, 11.01}, {46.01, 11.01}})};
  for (const auto& g : shapes) {
    const Geometry back = parse_wkt(geometry_to_wkt(g));
    EXPECT_EQ(geometry_to_wkt(back), geometry_to_wkt(g));
    EXPECT_EQ(back.index(), g.index());
  }
  EXPECT_THROW(parse_wkt("CIRCLE (1 2)"), ValidationError);
  EXPECT_THROW(parse_wkt("POINT (1)"), ValidationError);
}
