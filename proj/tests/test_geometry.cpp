#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "aurk/geometry.hpp"

using aurk::Bitmap;
using aurk::Point;
using aurk::Polygon;

namespace {

bool on_segment(Point p, Point a, Point b) {
  const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  if (cross != 0.0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

// Classic crossing-number test plus an exact boundary check, so the oracle
// describes the closed polygon.
bool inside_closed(const Polygon& poly, Point p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(p, poly[i], poly[(i + 1) % n])) return true;
  bool c = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) c = !c;
  }
  return c;
}

Bitmap brute_force(const Polygon& poly, int w, int h) {
  Bitmap out(w, h);
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col)
      if (inside_closed(poly, {col + 0.5, row + 0.5})) out.set(col, row);
  return out;
}

// Star-shaped around a centre with sorted angles. Snapping to the half-pixel
// grid can merge or fold vertices, so such draws are retried.
Polygon random_star(std::mt19937_64& rng, int grid, bool snap) {
  std::uniform_int_distribution<int> nv(3, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Polygon poly;
  do {
    const int n = nv(rng);
    std::vector<double> angles(static_cast<std::size_t>(n));
    for (double& a : angles) a = 2.0 * std::numbers::pi * u(rng);
    std::sort(angles.begin(), angles.end());
    const double cx = grid * (0.2 + 0.6 * u(rng));
    const double cy = grid * (0.2 + 0.6 * u(rng));
    poly.clear();
    for (double a : angles) {
      const double r = grid * (0.1 + 0.5 * u(rng));
      Point p{cx + r * std::cos(a), cy + r * std::sin(a)};
      if (snap) p = {std::round(p.x * 2.0) / 2.0, std::round(p.y * 2.0) / 2.0};
      poly.push_back(p);
    }
  } while (!aurk::is_simple(poly));
  return poly;
}

}  // namespace

TEST(Rasterize, AxisAlignedSquareCoversSixteenPixels) {
  const Polygon square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  const Bitmap m = aurk::rasterize(square, 8, 8);
  EXPECT_EQ(m.count(), 16u);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_TRUE(m.get(c, r));
}

TEST(Rasterize, TriangleMatchesPointInPolygonScan) {
  const Polygon tri{{0, 0}, {4, 0}, {0, 4}};
  const Bitmap m = aurk::rasterize(tri, 8, 8);
  EXPECT_EQ(m, brute_force(tri, 8, 8));
  EXPECT_EQ(m.count(), 10u);
}

TEST(Rasterize, PolygonOutsideImageIsEmpty) {
  const Polygon far{{100, 100}, {120, 100}, {110, 130}};
  EXPECT_TRUE(aurk::rasterize(far, 16, 16).empty());
  const Polygon left{{-10, 2}, {-2, 2}, {-5, 9}};
  EXPECT_TRUE(aurk::rasterize(left, 16, 16).empty());
}

TEST(Rasterize, VertexOrderDoesNotMatter) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    Polygon p = random_star(rng, 48, i % 2 == 0);
    const Bitmap a = aurk::rasterize(p, 48, 48);
    std::reverse(p.begin(), p.end());
    EXPECT_EQ(aurk::rasterize(p, 48, 48), a);
    std::rotate(p.begin(), p.begin() + 1, p.end());
    EXPECT_EQ(aurk::rasterize(p, 48, 48), a);
  }
}

TEST(Rasterize, AgreesWithBruteForceOnRandomPolygons) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const int grid = 16 + static_cast<int>(rng() % 49);  // up to 64x64
    const Polygon p = random_star(rng, grid, i % 2 == 1);
    ASSERT_TRUE(aurk::is_simple(p)) << "polygon " << i;
    EXPECT_EQ(aurk::rasterize(p, grid, grid), brute_force(p, grid, grid)) << "polygon " << i;
  }
}

TEST(Rasterize, PartiallyClippedPolygon) {
  const Polygon p{{-3.2, -1.7}, {9.6, 2.1}, {5.5, 12.8}, {-2.0, 7.3}};
  EXPECT_EQ(aurk::rasterize(p, 8, 8), brute_force(p, 8, 8));
}

TEST(Geometry, SignedAreaAndSimplicity) {
  const Polygon ccw{{0, 0}, {4, 0}, {4, 3}};
  EXPECT_DOUBLE_EQ(aurk::signed_area(ccw), 6.0);
  const Polygon cw{{0, 0}, {4, 3}, {4, 0}};
  EXPECT_DOUBLE_EQ(aurk::signed_area(cw), -6.0);
  EXPECT_TRUE(aurk::is_simple(ccw));
  const Polygon bowtie{{0, 0}, {4, 4}, {4, 0}, {0, 4}};
  EXPECT_FALSE(aurk::is_simple(bowtie));
  const Polygon two{{0, 0}, {1, 1}};
  EXPECT_FALSE(aurk::is_simple(two));
}

TEST(Bitmap, SetAlgebra) {
  Bitmap a(4, 4), b(4, 4);
  a.set(0, 0);
  a.set(1, 1);
  b.set(1, 1);
  EXPECT_TRUE(b.is_subset_of(a));
  EXPECT_FALSE(a.is_subset_of(b));
  EXPECT_EQ((a & b).count(), 1u);
  b.set(3, 3);
  a |= b;
  EXPECT_EQ(a.count(), 3u);
}
