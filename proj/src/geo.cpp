#include "bigthick/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "bigthick/error.hpp"

namespace bigthick {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kOnEdgeTolerance = 1e-12;

bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  if (std::abs(cross) > kOnEdgeTolerance) return false;
  return p.lon >= std::min(a.lon, b.lon) - kOnEdgeTolerance &&
         p.lon <= std::max(a.lon, b.lon) + kOnEdgeTolerance &&
         p.lat >= std::min(a.lat, b.lat) - kOnEdgeTolerance &&
         p.lat <= std::max(a.lat, b.lat) + kOnEdgeTolerance;
}

void check_ring(const Polygon& poly) {
  const auto& r = poly.ring;
  if (r.size() < 4) {
    throw ValidationError(fmt::format("malformed polygon: ring has {} vertices, need >= 4", r.size()));
  }
  if (r.front().lat != r.back().lat || r.front().lon != r.back().lon) {
    throw ValidationError("malformed polygon: ring is not closed");
  }
  if (ring_area(r) == 0.0) {
    throw ValidationError("malformed polygon: zero area");
  }
}

}  // namespace

bool GeoPoint::valid() const {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 &&
         lon <= 180.0 && (!alt || std::isfinite(*alt));
}

double geo_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(h)));
}

bool within_bbox(const GeoPoint& p, const BoundingBox& b) {
  return p.lat >= b.min_lat && p.lat <= b.max_lat && p.lon >= b.min_lon && p.lon <= b.max_lon;
}

double ring_area(std::span<const GeoPoint> ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    twice += ring[i].lon * ring[i + 1].lat - ring[i + 1].lon * ring[i].lat;
  }
  return twice / 2.0;
}

bool point_in_polygon(const GeoPoint& p, const Polygon& poly) {
  check_ring(poly);
  const auto& r = poly.ring;
  bool inside = false;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const GeoPoint& a = r[i];
    const GeoPoint& b = r[i + 1];
    if (on_segment(p, a, b)) return true;
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double lon_at = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < lon_at) inside = !inside;
    }
  }
  return inside;
}

void validate(const Geometry& g) {
  std::visit(
      [](const auto& geom) {
        using T = std::decay_t<decltype(geom)>;
        if constexpr (std::is_same_v<T, Point>) {
          if (!geom.at.valid()) throw ValidationError("invalid coordinates");
        } else if constexpr (std::is_same_v<T, Polyline>) {
          if (geom.points.size() < 2) throw ValidationError("polyline needs at least 2 points");
          for (const auto& p : geom.points)
            if (!p.valid()) throw ValidationError("invalid coordinates");
          const bool distinct = std::any_of(geom.points.begin() + 1, geom.points.end(), [&](const GeoPoint& q) {
            return q.lat != geom.points.front().lat || q.lon != geom.points.front().lon;
          });
          if (!distinct) throw ValidationError("polyline needs at least 2 distinct points");
        } else {
          for (const auto& p : geom.ring)
            if (!p.valid()) throw ValidationError("invalid coordinates");
          check_ring(geom);
        }
      },
      g);
}

GeoPoint centroid(const Geometry& g) {
  return std::visit(
      [](const auto& geom) -> GeoPoint {
        using T = std::decay_t<decltype(geom)>;
        if constexpr (std::is_same_v<T, Point>) {
          return geom.at;
        } else if constexpr (std::is_same_v<T, Polyline>) {
          double total = 0.0, lat = 0.0, lon = 0.0;
          for (std::size_t i = 0; i + 1 < geom.points.size(); ++i) {
            const auto& a = geom.points[i];
            const auto& b = geom.points[i + 1];
            const double len = std::hypot(b.lat - a.lat, b.lon - a.lon);
            total += len;
            lat += len * (a.lat + b.lat) / 2.0;
            lon += len * (a.lon + b.lon) / 2.0;
          }
          if (total == 0.0) return geom.points.front();
          return {lat / total, lon / total, std::nullopt};
        } else {
          const auto& r = geom.ring;
          const double area = ring_area(r);
          if (area == 0.0) return r.front();
          double clat = 0.0, clon = 0.0;
          for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            const double f = r[i].lon * r[i + 1].lat - r[i + 1].lon * r[i].lat;
            clon += (r[i].lon + r[i + 1].lon) * f;
            clat += (r[i].lat + r[i + 1].lat) * f;
          }
          return {clat / (6.0 * area), clon / (6.0 * area), std::nullopt};
        }
      },
      g);
}

std::vector<GeoPoint> vertices(const Geometry& g) {
  return std::visit(
      [](const auto& geom) -> std::vector<GeoPoint> {
        using T = std::decay_t<decltype(geom)>;
        if constexpr (std::is_same_v<T, Point>) {
          return {geom.at};
        } else if constexpr (std::is_same_v<T, Polyline>) {
          return geom.points;
        } else {
          if (geom.ring.empty()) return {};
          return {geom.ring.begin(), geom.ring.end() - 1};
        }
      },
      g);
}

BoundingBox bounds_of(std::span<const GeoPoint> points) {
  if (points.empty()) return {};
  BoundingBox b{points[0].lat, points[0].lat, points[0].lon, points[0].lon};
  for (const auto& p : points) {
    b.min_lat = std::min(b.min_lat, p.lat);
    b.max_lat = std::max(b.max_lat, p.lat);
    b.min_lon = std::min(b.min_lon, p.lon);
    b.max_lon = std::max(b.max_lon, p.lon);
  }
  return b;
}

Polygon make_ring(std::vector<GeoPoint> open_vertices) {
  if (!open_vertices.empty()) open_vertices.push_back(open_vertices.front());
  return Polygon{std::move(open_vertices)};
}

GeoPoint offset_by(const GeoPoint& p, double east_m, double north_m) {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  const double lat = p.lat + north_m / kEarthRadiusMeters * kDeg;
  const double lon = p.lon + east_m / (kEarthRadiusMeters * std::cos(p.lat / kDeg)) * kDeg;
  return GeoPoint{lat, lon, p.alt};
}

}  // namespace bigthick
