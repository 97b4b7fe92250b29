#include "aurk/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace aurk {

double signed_area(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(const Point& o, const Point& a, const Point& b) {
  const double c = cross(o, a, b);
  return (c > 0.0) - (c < 0.0);
}

bool within_box(const Point& p, const Point& a, const Point& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_touch(const Point& a, const Point& b, const Point& c, const Point& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_box(c, a, b)) return true;
  if (o2 == 0 && within_box(d, a, b)) return true;
  if (o3 == 0 && within_box(a, c, d)) return true;
  if (o4 == 0 && within_box(b, c, d)) return true;
  return false;
}

}  // namespace

bool is_simple(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point& c = polygon[j];
      const Point& d = polygon[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Shared vertex is fine; folding back along the same line is not.
        const Point& shared = (j == i + 1) ? b : a;
        const Point& p = (j == i + 1) ? a : b;
        const Point& q = (j == i + 1) ? d : c;
        if (orientation(shared, p, q) == 0) {
          const double dot = (p.x - shared.x) * (q.x - shared.x) +
                             (p.y - shared.y) * (q.y - shared.y);
          if (dot > 0.0) return false;
        }
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

Bitmap::Bitmap(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative bitmap size");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Bitmap::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Bitmap& Bitmap::operator|=(const Bitmap& other) {
  if (other.width_ != width_ || other.height_ != height_)
    throw std::invalid_argument("bitmap size mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

Bitmap Bitmap::operator&(const Bitmap& other) const {
  if (other.width_ != width_ || other.height_ != height_)
    throw std::invalid_argument("bitmap size mismatch");
  Bitmap out(width_, height_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & other.bits_[i];
  return out;
}

bool Bitmap::is_subset_of(const Bitmap& other) const {
  if (other.width_ != width_ || other.height_ != height_)
    throw std::invalid_argument("bitmap size mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] && !other.bits_[i]) return false;
  return true;
}

namespace {

// Columns whose centre lies in [x0, x1].
void fill_span(Bitmap& out, int row, double x0, double x1) {
  const int first = std::max(0, static_cast<int>(std::ceil(x0 - 0.5)));
  const int last = std::min(out.width() - 1, static_cast<int>(std::floor(x1 - 0.5)));
  for (int col = first; col <= last; ++col) out.set(col, row);
}

}  // namespace

Bitmap rasterize(std::span<const Point> polygon, int width, int height) {
  Bitmap out(width, height);
  const std::size_t n = polygon.size();
  if (n < 3 || width == 0 || height == 0) return out;

  double y_min = polygon[0].y;
  double y_max = polygon[0].y;
  for (const Point& p : polygon) {
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  const int row_first = std::max(0, static_cast<int>(std::ceil(y_min - 0.5)));
  const int row_last = std::min(height - 1, static_cast<int>(std::floor(y_max - 0.5)));

  std::vector<double> crossings;
  crossings.reserve(n);
  for (int row = row_first; row <= row_last; ++row) {
    const double yc = row + 0.5;
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = polygon[i];
      const Point& b = polygon[(i + 1) % n];
      if (a.y == b.y) continue;
      // Canonical endpoint order keeps the intersection bit-identical for an
      // edge shared by two polygons regardless of traversal direction.
      const Point& lo = a.y < b.y ? a : b;
      const Point& hi = a.y < b.y ? b : a;
      if (lo.y <= yc && yc < hi.y)
        crossings.push_back(lo.x + (yc - lo.y) * (hi.x - lo.x) / (hi.y - lo.y));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2)
      fill_span(out, row, crossings[k], crossings[k + 1]);

    // Boundary points excluded by the half-open rule.
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = polygon[i];
      const Point& b = polygon[(i + 1) % n];
      if (a.y == yc && b.y == yc) {
        fill_span(out, row, std::min(a.x, b.x), std::max(a.x, b.x));
      } else if (a.y == yc) {
        fill_span(out, row, a.x, a.x);
      }
    }
  }
  return out;
}

}  // namespace aurk
