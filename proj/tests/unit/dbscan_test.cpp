#include <gtest/gtest.h>

#include <random>

#include "bigthick/dbscan.hpp"
#include "bigthick/error.hpp"
#include "oracles.hpp"

using namespace bigthick;

namespace {

std::vector<GeoPoint> blobs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> centre(-300, 300);
  std::normal_distribution<double> spread(0, 15);
  std::uniform_int_distribution<int> which(0, 3);
  const GeoPoint origin{46.07, 11.12};
  std::vector<GeoPoint> centres;
  for (int i = 0; i < 4; ++i) centres.push_back(offset_by(origin, centre(rng), centre(rng)));
  std::vector<GeoPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    // A fifth of the points is uniform clutter.
    if (i % 5 == 0) out.push_back(offset_by(origin, centre(rng), centre(rng)));
    else out.push_back(offset_by(centres[which(rng)], spread(rng), spread(rng)));
  }
  return out;
}

}  // namespace

TEST(Dbscan, EmptyInput) {
  const auto c = dbscan(std::vector<GeoPoint>{}, 30, 3);
  EXPECT_TRUE(c.labels.empty());
  EXPECT_EQ(c.cluster_count, 0);
}

TEST(Dbscan, RejectsBadParameters) {
  const std::vector<GeoPoint> pts{{46, 11}};
  EXPECT_THROW(dbscan(pts, 0, 3), ValidationError);
  EXPECT_THROW(dbscan(pts, 30, 0), ValidationError);
}

TEST(Dbscan, IsolatedPointsAreNoise) {
  const GeoPoint o{46.07, 11.12};
  const std::vector<GeoPoint> pts{o, offset_by(o, 100, 0), offset_by(o, 0, 100)};
  const auto c = dbscan(pts, 30, 2);
  EXPECT_EQ(c.cluster_count, 0);
  EXPECT_EQ(c.noise().size(), 3u);
}

TEST(Dbscan, MinPtsOneMakesEveryPointCore) {
  const GeoPoint o{46.07, 11.12};
  const std::vector<GeoPoint> pts{o, offset_by(o, 100, 0)};
  const auto c = dbscan(pts, 30, 1);
  EXPECT_EQ(c.cluster_count, 2);
}

TEST(Dbscan, BorderPointJoinsTheFirstCluster) {
  // Two tight groups 50 m apart with a border point 25 m from each.
  const GeoPoint o{46.07, 11.12};
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 3; ++i) pts.push_back(offset_by(o, -25.0 - i, 0));
  pts.push_back(o);
  for (int i = 0; i < 3; ++i) pts.push_back(offset_by(o, 25.0 + i, 0));
  const auto c = dbscan(pts, 25.5, 4);
  ASSERT_EQ(c.cluster_count, 2);
  EXPECT_EQ(c.labels[3], c.labels[0]);
}

TEST(Dbscan, MatchesNaiveImplementation) {
  std::mt19937_64 rng(41);
  for (int inst = 0; inst < 60; ++inst) {
    const auto pts = blobs(rng, 20 + static_cast<std::size_t>(inst) * 5);
    for (std::size_t min_pts : {2u, 3u, 5u}) {
      for (double eps : {10.0, 30.0}) {
        EXPECT_EQ(dbscan(pts, eps, min_pts).labels, oracle::naive_dbscan(pts, eps, min_pts)) << "instance " << inst;
      }
    }
  }
}

TEST(Dbscan, ClustersAndNoisePartitionTheInput) {
  std::mt19937_64 rng(43);
  const auto pts = blobs(rng, 300);
  const auto c = dbscan(pts, 30, 3);
  std::size_t total = c.noise().size();
  for (const auto& members : c.clusters()) total += members.size();
  EXPECT_EQ(total, pts.size());
}
