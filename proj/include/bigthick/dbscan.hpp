#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bigthick/geo.hpp"

namespace bigthick {

/// Label of points that belong to no cluster.
inline constexpr int kNoise = -1;

struct Clustering {
  /// Cluster id per input point (0-based, in discovery order) or kNoise.
  std::vector<int> labels;
  int cluster_count = 0;

  /// Member indices per cluster, ascending.
  std::vector<std::vector<std::size_t>> clusters() const;
  std::vector<std::size_t> noise() const;
};

/// Density-based clustering under haversine distance. A point is core when at
/// least `min_pts` points (itself included) lie within `eps_m`. Clusters are
/// seeded and expanded in input order, so border points reachable from two
/// clusters join the one discovered first.
Clustering dbscan(std::span<const GeoPoint> points, double eps_m, std::size_t min_pts);

}  // namespace bigthick
