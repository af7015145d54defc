#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bigthick/geo.hpp"

namespace bigthick {

inline constexpr double kDefaultCellSizeMeters = 100.0;

struct IndexedPoint {
  std::string id;
  GeoPoint at;
};

struct IndexHit {
  std::uint32_t slot;  // position in the build input
  double distance_m;
};

/// Uniform lat/lon grid over a bounding box. Immutable once built.
///
/// Cells are at least `cell_size` meters on each side everywhere in the box.
/// Radius queries scan the cells covering the exact great-circle extent of the
/// search disk, then filter by haversine distance, so results match a full
/// scan for any cell size.
class SpatialIndex {
 public:
  SpatialIndex() = default;

  /// Throws ValidationError naming the first point outside `region`.
  static SpatialIndex build(std::vector<IndexedPoint> points, const BoundingBox& region,
                            double cell_size_m = kDefaultCellSizeMeters);

  /// Hits with distance <= radius, ascending by distance then id.
  std::vector<IndexHit> query_within(const GeoPoint& p, double radius_m) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::string& id(std::uint32_t slot) const { return points_[slot].id; }
  const GeoPoint& point(std::uint32_t slot) const { return points_[slot].at; }
  const BoundingBox& region() const { return region_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  /// Cell of a slot; every slot lives in exactly one cell.
  std::size_t cell_of(std::uint32_t slot) const;
  std::span<const std::uint32_t> cell(std::size_t row, std::size_t col) const;

 private:
  std::size_t row_for(double lat) const;
  std::size_t col_for(double lon) const;

  std::vector<IndexedPoint> points_;
  BoundingBox region_{};
  double lat_step_ = 1.0;
  double lon_step_ = 1.0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint32_t> cell_start_;  // rows_*cols_ + 1 offsets into slots_
  std::vector<std::uint32_t> slots_;
};

}  // namespace bigthick
