#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aurk {

/// Continuous image coordinate. Pixel (col, row) covers [col, col+1) x [row, row+1);
/// its centre is (col + 0.5, row + 0.5).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using Polygon = std::vector<Point>;

/// Shoelace area; positive for counter-clockwise vertex order in a y-up frame.
double signed_area(std::span<const Point> polygon);

/// True when no two non-adjacent edges touch and adjacent edges only share
/// their common vertex. Requires at least three vertices.
bool is_simple(std::span<const Point> polygon);

/// Dense binary pixel mask.
class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool get(int col, int row) const { return bits_[index(col, row)] != 0; }
  void set(int col, int row, bool on = true) { bits_[index(col, row)] = on ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  Bitmap& operator|=(const Bitmap& other);
  /// Pixels set in both masks.
  Bitmap operator&(const Bitmap& other) const;
  bool is_subset_of(const Bitmap& other) const;

  std::span<const std::uint8_t> raw() const noexcept { return bits_; }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Scanline fill of a simple polygon, sampled at pixel centres.
///
/// Crossings are collected with the half-open rule `y_lo <= yc < y_hi` and
/// paired even-odd; each span is inclusive at both ends. Centres lying exactly
/// on the boundary (bottom vertices, horizontal edges) are added afterwards, so
/// the result is the closed polygon sampled at pixel centres. Pixels on an edge
/// shared by two polygons are therefore set in both masks; partition-level
/// ownership is resolved by `RegionMap` (lower roi number wins).
Bitmap rasterize(std::span<const Point> polygon, int width, int height);

}  // namespace aurk
