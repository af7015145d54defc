#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace bigthick {

/// Mean earth radius used for every distance computation (spherical model).
inline constexpr double kEarthRadiusMeters = 6'371'000.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> alt;

  bool valid() const;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct BoundingBox {
  double min_lat = 0.0;
  double max_lat = 0.0;
  double min_lon = 0.0;
  double max_lon = 0.0;

  bool valid() const { return min_lat <= max_lat && min_lon <= max_lon; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Point {
  GeoPoint at;
};

struct Polyline {
  std::vector<GeoPoint> points;
};

/// Closed ring: first vertex repeated as last.
struct Polygon {
  std::vector<GeoPoint> ring;
};

using Geometry = std::variant<Point, Polyline, Polygon>;

/// Haversine distance in meters.
double geo_distance(const GeoPoint& a, const GeoPoint& b);

bool within_bbox(const GeoPoint& p, const BoundingBox& b);

/// Ray casting in the lat/lon plane; vertices and edges count as inside.
/// Throws ValidationError for rings that are open, too short or of zero area.
bool point_in_polygon(const GeoPoint& p, const Polygon& poly);

/// Signed shoelace area in squared degrees.
double ring_area(std::span<const GeoPoint> ring);

void validate(const Geometry& g);

/// Representative coordinate: the point itself, length-weighted midpoint of a
/// polyline, area centroid of a polygon.
GeoPoint centroid(const Geometry& g);

/// Every vertex of the geometry (polygon ring without the closing repeat).
std::vector<GeoPoint> vertices(const Geometry& g);

BoundingBox bounds_of(std::span<const GeoPoint> points);

/// Point displaced by local east/north offsets in meters (small offsets only).
GeoPoint offset_by(const GeoPoint& p, double east_m, double north_m);

/// Builders for tests and generators.
Polygon make_ring(std::vector<GeoPoint> open_vertices);

}  // namespace bigthick
