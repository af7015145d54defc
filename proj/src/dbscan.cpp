#include "bigthick/dbscan.hpp"

#include <deque>
#include <string>

#include "bigthick/error.hpp"
#include "bigthick/spatial_index.hpp"

namespace bigthick {
namespace {

constexpr int kUnvisited = -2;

}  // namespace

std::vector<std::vector<std::size_t>> Clustering::clusters() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(cluster_count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) out[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return out;
}

std::vector<std::size_t> Clustering::noise() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == kNoise) out.push_back(i);
  return out;
}

Clustering dbscan(std::span<const GeoPoint> points, double eps_m, std::size_t min_pts) {
  if (!(eps_m > 0.0)) throw ValidationError("dbscan: eps must be positive");
  if (min_pts < 1) throw ValidationError("dbscan: min_pts must be at least 1");

  Clustering out;
  out.labels.assign(points.size(), kUnvisited);
  if (points.empty()) return out;

  std::vector<IndexedPoint> indexed;
  indexed.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) indexed.push_back({std::to_string(i), points[i]});
  const SpatialIndex ix = SpatialIndex::build(std::move(indexed), bounds_of(points), eps_m);

  auto neighbours = [&](std::size_t i) { return ix.query_within(points[i], eps_m); };

  auto& labels = out.labels;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != kUnvisited) continue;
    const auto seed = neighbours(i);
    if (seed.size() < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int cluster = out.cluster_count++;
    labels[i] = cluster;
    std::deque<std::uint32_t> frontier;
    for (const auto& h : seed) frontier.push_back(h.slot);
    while (!frontier.empty()) {
      const std::uint32_t q = frontier.front();
      frontier.pop_front();
      if (labels[q] == kNoise) labels[q] = cluster;
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      const auto reach = neighbours(q);
      if (reach.size() >= min_pts) {
        for (const auto& h : reach)
          if (labels[h.slot] == kUnvisited || labels[h.slot] == kNoise) frontier.push_back(h.slot);
      }
    }
  }
  return out;
}

}  // namespace bigthick
