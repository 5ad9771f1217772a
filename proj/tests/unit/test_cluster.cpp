#include <gtest/gtest.h>

#include <algorithm>

#include "spotattack/cluster.hpp"
#include "test_support.hpp"

namespace spotattack {
namespace {

using testing::count_ones;
using testing::data_file;
using testing::random_mask;

Mask rect(int side, Position p, Dims d = kCharDims) { return rasterize_mask(shape::Rect{side}, p, d); }

const PositionRecord& find_pair(const std::vector<PositionRecord>& recs, const std::string& s, const std::string& t) {
  const auto it = std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.source == s && r.target == t; });
  if (it == recs.end()) throw std::runtime_error("pair " + s + "->" + t + " missing from fixture");
  return *it;
}

TEST(Overlay, SingleAndRepeated) {
  const Mask m = rect(3, {4, 4});
  const OverlapMap one = overlay({m});
  const OverlapMap three = overlay({m, m, m});
  for (int r = 0; r < 60; ++r) {
    for (int c = 0; c < 35; ++c) {
      EXPECT_EQ(one.at(r, c), m.at(r, c) ? 1 : 0);
      EXPECT_EQ(three.at(r, c), m.at(r, c) ? 3 : 0);
    }
  }
  EXPECT_EQ(three.contributors(), 3);
  EXPECT_EQ(three.max_count(), 3);
}

TEST(Overlay, Errors) {
  EXPECT_THROW(overlay({}), EmptyList);
  EXPECT_THROW(overlay({Mask({2, 2}), Mask({2, 3})}), DimensionMismatch);
}

TEST(Overlay, DiagonalTripleMeetsAtOnePixel) {
  const OverlapMap o = overlay({rect(3, {0, 0}), rect(3, {1, 1}), rect(3, {2, 2})});
  for (int r = 0; r < 60; ++r)
    for (int c = 0; c < 35; ++c) EXPECT_EQ(o.at(r, c) == 3, r == 2 && c == 2);
  const Mask cm = cluster_mask(o, 3);
  EXPECT_EQ(count_ones(cm), 1);
  EXPECT_TRUE(cm.at(2, 2));
}

TEST(ClusterMask, Thresholds) {
  const Mask a = rect(3, {0, 0});
  const Mask b = rect(3, {1, 1});
  EXPECT_EQ(count_ones(cluster_mask(overlay({a, b}), 3)), 0);
  const Mask u = cluster_mask(overlay({a, b}), 1);
  for (int r = 0; r < 60; ++r)
    for (int c = 0; c < 35; ++c) EXPECT_EQ(u.at(r, c), a.at(r, c) || b.at(r, c));
  EXPECT_THROW(cluster_mask(overlay({a}), 0), InvalidArgument);
}

// Brute-force checks on random small instances: each set pixel is covered by at least
// k inputs, each pixel so covered is set, larger k never adds pixels, and input order
// does not matter.
TEST(ClusterMask, BruteForceProperties) {
  Rng rng(4);
  const Dims d{6, 5};
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 5));
    std::vector<Mask> ms;
    for (int i = 0; i < n; ++i) ms.push_back(random_mask(d, 0.5, rng));
    const OverlapMap o = overlay(ms);
    std::vector<Mask> rev(ms.rbegin(), ms.rend());
    ASSERT_EQ(overlay(rev).counts(), o.counts());
    Mask prev = cluster_mask(o, 1);
    for (int k = 1; k <= n + 1; ++k) {
      const Mask cm = cluster_mask(o, k);
      for (int r = 0; r < d.height; ++r) {
        for (int c = 0; c < d.width; ++c) {
          int cover = 0;
          for (const auto& m : ms) cover += m.at(r, c);
          ASSERT_EQ(cm.at(r, c), cover >= k);
          ASSERT_LE(o.at(r, c), n);
          if (cm.at(r, c)) {
            ASSERT_TRUE(prev.at(r, c));
          }
        }
      }
      prev = cm;
    }
  }
}

TEST(BuildClusterAttack, SingleAndIdentical) {
  const PositionRecord single{"A", "F", {{7, 23}}};
  EXPECT_EQ(count_ones(build_cluster_attack(single, shape::Rect{5}, kCharDims)), 0);
  const PositionRecord same{"A", "B", {{10, 10}, {10, 10}, {10, 10}, {10, 10}}};
  EXPECT_EQ(build_cluster_attack(same, shape::Rect{5}, kCharDims), rect(5, {10, 10}));
  EXPECT_THROW(build_cluster_attack(PositionRecord{"A", "B", {}}, shape::Rect{5}, kCharDims), EmptyList);
  EXPECT_THROW(build_cluster_attack(PositionRecord{"A", "B", {{59, 0}}}, shape::Rect{5}, kCharDims),
               PositionOutOfRange);
}

TEST(ReferencePositions, FixtureShape) {
  const auto recs = read_position_records(data_file("reference_positions.csv"));
  const auto& af = find_pair(recs, "A", "F");
  ASSERT_EQ(af.positions.size(), 1u);
  EXPECT_EQ(af.positions[0], (Position{7, 23}));
  const auto& db = find_pair(recs, "D", "B");
  EXPECT_EQ(db.positions.size(), 8u);
  EXPECT_EQ(std::count(db.positions.begin(), db.positions.end(), Position{24, 14}), 3);
}

// Recomputes the D->B overlay pixel by pixel and compares it with the library result.
TEST(ReferencePositions, DToBClusterRegion) {
  const auto recs = read_position_records(data_file("reference_positions.csv"));
  const auto& db = find_pair(recs, "D", "B");
  for (int side : {3, 5}) {
    const Mask cm = build_cluster_attack(db, shape::Rect{side}, kCharDims, 3);
    long ones = 0;
    for (int r = 0; r < 60; ++r) {
      for (int c = 0; c < 35; ++c) {
        int cover = 0;
        for (Position p : db.positions) cover += r >= p.a && r < p.a + side && c >= p.b && c < p.b + side;
        ASSERT_EQ(cm.at(r, c), cover >= 3);
        ones += cover >= 3;
      }
    }
    EXPECT_GT(ones, 0);
    for (int r = 24; r <= 26; ++r) EXPECT_TRUE(cm.at(r, 14)) << "row " << r;
    EXPECT_EQ(count_ones(cm), ones);
  }
}

TEST(PositionCsv, ParseFormatRoundTrip) {
  const std::string csv = "source,target,a,b\nD,B,1,2\nA,F,7,23\nD,B,3,4\n";
  const auto recs = parse_position_records(csv);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].source, "D");
  EXPECT_EQ(recs[0].positions, (std::vector<Position>{{1, 2}, {3, 4}}));
  EXPECT_EQ(recs[1].target, "F");
  EXPECT_EQ(parse_position_records(format_position_records(recs))[0].positions, recs[0].positions);
  EXPECT_TRUE(parse_position_records("source,target,a,b\n").empty());
}

TEST(PositionCsv, Errors) {
  EXPECT_THROW(parse_position_records(""), ParseError);
  EXPECT_THROW(parse_position_records("s,t,a,b\n"), ParseError);
  EXPECT_THROW(parse_position_records("source,target,a,b\nA,B,1\n"), ParseError);
  EXPECT_THROW(parse_position_records("source,target,a,b\nA,B,x,2\n"), ParseError);
  EXPECT_THROW(read_position_records("/nonexistent/p.csv"), IoError);
}

}  // namespace
}  // namespace spotattack
