#include "bigthick/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "bigthick/error.hpp"

namespace bigthick {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kMetersPerDegree = kEarthRadiusMeters * std::numbers::pi / 180.0;
// Keeps the grid bounded for tiny cells over wide regions.
constexpr std::size_t kMaxCells = std::size_t{1} << 24;
constexpr double kSlackDeg = 1e-9;

}  // namespace

SpatialIndex SpatialIndex::build(std::vector<IndexedPoint> points, const BoundingBox& region,
                                 double cell_size_m) {
  if (!region.valid()) throw ValidationError("spatial index: invalid bounding box");
  if (!(cell_size_m > 0.0)) throw ValidationError("spatial index: cell size must be positive");
  for (const auto& p : points) {
    if (!p.at.valid() || !within_bbox(p.at, region)) {
      throw ValidationError(fmt::format("spatial index: point '{}' ({}, {}) lies outside the declared region",
                                        p.id, p.at.lat, p.at.lon));
    }
  }

  SpatialIndex ix;
  ix.region_ = region;
  ix.points_ = std::move(points);

  const double worst_lat = std::max(std::abs(region.min_lat), std::abs(region.max_lat));
  const double cos_lat = std::max(std::cos(worst_lat / kRadToDeg), 1e-6);
  ix.lat_step_ = cell_size_m / kMetersPerDegree;
  ix.lon_step_ = cell_size_m / (kMetersPerDegree * cos_lat);

  auto span_cells = [](double extent, double step) {
    return static_cast<std::size_t>(std::floor(extent / step)) + 1;
  };
  ix.rows_ = span_cells(region.max_lat - region.min_lat, ix.lat_step_);
  ix.cols_ = span_cells(region.max_lon - region.min_lon, ix.lon_step_);
  while (ix.rows_ * ix.cols_ > kMaxCells) {
    ix.lat_step_ *= 2.0;
    ix.lon_step_ *= 2.0;
    ix.rows_ = span_cells(region.max_lat - region.min_lat, ix.lat_step_);
    ix.cols_ = span_cells(region.max_lon - region.min_lon, ix.lon_step_);
  }

  // Counting sort by cell keeps slot order stable inside each cell.
  const std::size_t ncells = ix.rows_ * ix.cols_;
  ix.cell_start_.assign(ncells + 1, 0);
  for (std::uint32_t s = 0; s < ix.points_.size(); ++s) ++ix.cell_start_[ix.cell_of(s) + 1];
  for (std::size_t c = 0; c < ncells; ++c) ix.cell_start_[c + 1] += ix.cell_start_[c];
  ix.slots_.resize(ix.points_.size());
  std::vector<std::uint32_t> fill(ix.cell_start_.begin(), ix.cell_start_.end() - 1);
  for (std::uint32_t s = 0; s < ix.points_.size(); ++s) ix.slots_[fill[ix.cell_of(s)]++] = s;
  return ix;
}

std::size_t SpatialIndex::row_for(double lat) const {
  const double r = std::floor((lat - region_.min_lat) / lat_step_);
  return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(rows_ - 1)));
}

std::size_t SpatialIndex::col_for(double lon) const {
  const double c = std::floor((lon - region_.min_lon) / lon_step_);
  return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(cols_ - 1)));
}

std::size_t SpatialIndex::cell_of(std::uint32_t slot) const {
  const auto& p = points_[slot].at;
  return row_for(p.lat) * cols_ + col_for(p.lon);
}

std::span<const std::uint32_t> SpatialIndex::cell(std::size_t row, std::size_t col) const {
  const std::size_t c = row * cols_ + col;
  return {slots_.data() + cell_start_[c], slots_.data() + cell_start_[c + 1]};
}

std::vector<IndexHit> SpatialIndex::query_within(const GeoPoint& p, double radius_m) const {
  std::vector<IndexHit> hits;
  if (points_.empty() || radius_m < 0.0 || !p.valid()) return hits;

  const double angular = radius_m / kEarthRadiusMeters;
  const double dlat = angular * kRadToDeg + kSlackDeg;
  double lo_lat = p.lat - dlat;
  double hi_lat = p.lat + dlat;
  double lo_lon = region_.min_lon;
  double hi_lon = region_.max_lon;
  const double phi = p.lat / kRadToDeg;
  if (angular < std::numbers::pi / 2.0 - std::abs(phi)) {
    const double dlon = std::asin(std::min(1.0, std::sin(angular) / std::cos(phi))) * kRadToDeg + kSlackDeg;
    lo_lon = p.lon - dlon;
    hi_lon = p.lon + dlon;
  }
  if (hi_lat < region_.min_lat || lo_lat > region_.max_lat || hi_lon < region_.min_lon ||
      lo_lon > region_.max_lon) {
    return hits;
  }
  lo_lat = std::max(lo_lat, region_.min_lat);
  hi_lat = std::min(hi_lat, region_.max_lat);
  lo_lon = std::max(lo_lon, region_.min_lon);
  hi_lon = std::min(hi_lon, region_.max_lon);

  const std::size_t r0 = row_for(lo_lat), r1 = row_for(hi_lat);
  const std::size_t c0 = col_for(lo_lon), c1 = col_for(hi_lon);
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) {
      for (std::uint32_t s : cell(r, c)) {
        const double d = geo_distance(p, points_[s].at);
        if (d <= radius_m) hits.push_back({s, d});
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [this](const IndexHit& a, const IndexHit& b) {
    if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
    if (points_[a.slot].id != points_[b.slot].id) return points_[a.slot].id < points_[b.slot].id;
    return a.slot < b.slot;
  });
  return hits;
}

}  // namespace bigthick
