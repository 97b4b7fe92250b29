#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "aurk/error.hpp"
#include "aurk/face_model.hpp"
#include "aurk/roi_layout.hpp"

using aurk::Landmarks68;
using aurk::Point;

namespace {

Landmarks68 filled(Point p, int w = 512, int h = 512) {
  std::vector<Point> pts(aurk::kLandmarkCount, p);
  return aurk::make_landmarks(pts, w, h);
}

Landmarks68 with_points(Landmarks68 lm, int i, Point a, int j, Point b) {
  lm.points[static_cast<std::size_t>(i)] = a;
  lm.points[static_cast<std::size_t>(j)] = b;
  return lm;
}

// Rounded template face: integer landmarks keep derived points exact.
Landmarks68 integer_face(std::mt19937_64& rng, int w, int h) {
  Landmarks68 lm = aurk::random_face(rng, w, h);
  for (Point& p : lm.points) p = {std::round(p.x), std::round(p.y)};
  return lm;
}

}  // namespace

TEST(DerivedPoints, CheekMidpoint) {
  const Landmarks68 lm = with_points(filled({256, 256}), 13, {100, 200}, 29, {120, 240});
  const auto dp = aurk::derive_points(lm);
  EXPECT_EQ(dp.at("mid_13_29"), (Point{110, 220}));
}

TEST(DerivedPoints, CoincidentInputs) {
  const Landmarks68 lm = with_points(filled({256, 256}), 13, {50, 50}, 29, {50, 50});
  EXPECT_EQ(aurk::derive_points(lm).at("mid_13_29"), (Point{50, 50}));
}

TEST(DerivedPoints, DegenerateFaceCollapsesToOrigin) {
  const auto dp = aurk::derive_points(filled({0, 0}));
  ASSERT_FALSE(dp.points.empty());
  for (const Point& p : dp.points) EXPECT_EQ(p, (Point{0, 0}));
}

TEST(DerivedPoints, UnknownNameThrows) {
  const auto dp = aurk::derive_points(filled({1, 1}));
  EXPECT_THROW((void)dp.at("no_such_point"), std::out_of_range);
}

TEST(Partition, FortyThreeSimplePolygonsTileTheImage) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 96 + 32 * (trial % 3);
    const int h = 96 + 32 * ((trial + 1) % 3);
    const Landmarks68 lm = aurk::random_face(rng, w, h);
    const auto dp = aurk::derive_points(lm);
    const auto rois = aurk::partition_basic_rois(lm, dp);
    ASSERT_EQ(rois.size(), 43u);
    double area = 0.0;
    for (std::size_t i = 0; i < rois.size(); ++i) {
      EXPECT_EQ(rois[i].roi_no, static_cast<int>(i) + 1);
      EXPECT_GE(rois[i].polygon.size(), 3u);
      EXPECT_TRUE(aurk::is_simple(rois[i].polygon)) << "roi " << rois[i].roi_no;
      area += std::abs(aurk::signed_area(rois[i].polygon));
    }
    EXPECT_NEAR(area, static_cast<double>(w) * h, 1e-6 * w * h);

    const aurk::RegionMap map(rois, w, h);
    EXPECT_EQ(map.unowned_count(), 0u);
    std::size_t total = 0;
    for (int r = 1; r <= 43; ++r) total += map.pixel_count(r);
    EXPECT_EQ(total, static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  }
}

TEST(Partition, RegionMapGivesSharedEdgePixelsToLowerRoi) {
  aurk::BasicRoi a{5, "a", {{0, 0}, {4.5, 0}, {4.5, 4}, {0, 4}}};
  aurk::BasicRoi b{2, "b", {{4.5, 0}, {8, 0}, {8, 4}, {4.5, 4}}};
  const std::vector<aurk::BasicRoi> rois{a, b};
  const aurk::RegionMap map(rois, 8, 4);
  for (int row = 0; row < 4; ++row) EXPECT_EQ(map.owner(4, row), 2);
  EXPECT_EQ(map.contested_count(), 4u);
  EXPECT_EQ(map.pixel_count(2), 16u);
  EXPECT_EQ(map.pixel_count(5), 16u);
}

TEST(Partition, TranslationMovesEveryVertex) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Landmarks68 lm = integer_face(rng, 256, 256);
    const double dx = static_cast<double>(static_cast<int>(rng() % 9) - 4);
    const double dy = static_cast<double>(static_cast<int>(rng() % 9) - 4);
    const Landmarks68 moved = aurk::translated(lm, dx, dy);
    const auto a = aurk::partition_basic_rois(lm, aurk::derive_points(lm));
    const auto b = aurk::partition_basic_rois(moved, aurk::derive_points(moved));
    const auto& layout = aurk::RoiLayout::builtin();
    using Kind = aurk::RoiLayout::VertexRef::Kind;
    for (std::size_t r = 0; r < a.size(); ++r) {
      const auto& spec = layout.rois()[r].vertices;
      for (std::size_t v = 0; v < spec.size(); ++v) {
        const Point p = a[r].polygon[v];
        const Point q = b[r].polygon[v];
        // Landmark-driven coordinates shift; image-border coordinates stay put.
        const bool x_on_border = spec[v].kind == Kind::left || spec[v].kind == Kind::right ||
                                 spec[v].kind >= Kind::top_left;
        const bool y_on_border = spec[v].kind == Kind::top || spec[v].kind == Kind::bottom ||
                                 spec[v].kind >= Kind::top_left;
        EXPECT_EQ(q.x, x_on_border ? p.x : p.x + dx) << "roi " << r + 1 << " vertex " << v;
        EXPECT_EQ(q.y, y_on_border ? p.y : p.y + dy) << "roi " << r + 1 << " vertex " << v;
      }
    }
  }
}

TEST(Partition, Deterministic) {
  std::mt19937_64 rng(4);
  const Landmarks68 lm = aurk::random_face(rng, 200, 180);
  const auto a = aurk::partition_basic_rois(lm, aurk::derive_points(lm));
  const auto b = aurk::partition_basic_rois(lm, aurk::derive_points(lm));
  for (std::size_t r = 0; r < a.size(); ++r) EXPECT_EQ(a[r].polygon, b[r].polygon);
}

TEST(Partition, CollinearLandmarksAreDegenerate) {
  std::vector<Point> pts;
  for (int i = 0; i < aurk::kLandmarkCount; ++i) pts.push_back({100.0 + i, 100.0 + i});
  const Landmarks68 lm = aurk::make_landmarks(pts, 512, 512);
  try {
    aurk::partition_basic_rois(lm, aurk::derive_points(lm));
    FAIL() << "expected DegenerateRegionError";
  } catch (const aurk::DegenerateRegionError& e) {
    EXPECT_GE(e.roi_no(), 1);
    EXPECT_LE(e.roi_no(), 43);
    EXPECT_NE(std::string(e.what()).find(std::to_string(e.roi_no())), std::string::npos);
  }
}

TEST(RoiLayoutFile, BuiltinIsVersionOne) {
  const auto& layout = aurk::RoiLayout::builtin();
  EXPECT_EQ(layout.version(), 1);
  EXPECT_EQ(layout.rois().size(), 43u);
  EXPECT_NE(layout.content_hash(), 0u);
}

TEST(RoiLayoutFile, RejectsMalformedText) {
  EXPECT_THROW(aurk::RoiLayout::parse(""), aurk::FormatError);
  EXPECT_THROW(aurk::RoiLayout::parse("roi_layout 2\n"), aurk::VersionError);
  EXPECT_THROW(aurk::RoiLayout::parse("roi_layout 1\nroi 1 a : L0 L1 nowhere\n"), aurk::FormatError);
  EXPECT_THROW(aurk::RoiLayout::parse("roi_layout 1\npoint p = 0.5*L0 + 0.4*L1\n"), aurk::FormatError);
  // Well-formed lines but far fewer than 43 regions.
  EXPECT_THROW(aurk::RoiLayout::parse("roi_layout 1\npoint face_center = L0\nroi 1 a : L0 L1 L2\n"),
               aurk::FormatError);
}
