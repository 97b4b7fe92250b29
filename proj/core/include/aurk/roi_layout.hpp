#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/geometry.hpp"
#include "aurk/landmarks.hpp"

namespace aurk {

inline constexpr int kBasicRoiCount = 43;

/// Named points computed from the 68 landmarks (e.g. `mid_13_29`).
struct DerivedPoints {
  std::vector<std::string> names;
  std::vector<Point> points;

  /// Throws std::out_of_range for an unknown name.
  const Point& at(std::string_view name) const;
};

struct BasicRoi {
  int roi_no = 0;
  std::string name;
  Polygon polygon;
};

/// The versioned vertex table (`roi_layout.v1`) that turns landmarks into the
/// 43 basic RoIs. Text format is documented in FORMATS.md.
class RoiLayout {
 public:
  struct PointRef {
    bool derived = false;
    int index = 0;  // landmark number or derived-point slot
  };
  struct VertexRef {
    enum class Kind { point, left, right, top, bottom, top_left, top_right, bottom_left, bottom_right };
    Kind kind = Kind::point;
    PointRef ref;
  };
  struct DerivedSpec {
    std::string name;
    std::vector<std::pair<double, PointRef>> terms;
  };
  struct RoiSpec {
    int roi_no = 0;
    std::string name;
    std::vector<VertexRef> vertices;
  };

  static RoiLayout parse(std::string_view text);
  static RoiLayout load(const std::string& path);
  /// The layout shipped in core/data/roi_layout.v1, compiled in.
  static const RoiLayout& builtin();

  int version() const noexcept { return version_; }
  std::uint64_t content_hash() const noexcept { return hash_; }
  std::span<const DerivedSpec> derived_specs() const noexcept { return derived_; }
  std::span<const RoiSpec> rois() const noexcept { return rois_; }

  DerivedPoints derive(const Landmarks68& lm) const;
  /// Throws DegenerateRegionError for the first zero-area polygon.
  std::vector<BasicRoi> partition(const Landmarks68& lm, const DerivedPoints& dp) const;

 private:
  int version_ = 0;
  std::uint64_t hash_ = 0;
  std::vector<DerivedSpec> derived_;
  std::vector<RoiSpec> rois_;
};

DerivedPoints derive_points(const Landmarks68& lm, const RoiLayout& layout = RoiLayout::builtin());

std::vector<BasicRoi> partition_basic_rois(const Landmarks68& lm, const DerivedPoints& dp,
                                           const RoiLayout& layout = RoiLayout::builtin());

/// Rasterized RoI polygon. Alias of the free `rasterize` for a BasicRoi.
Bitmap rasterize(const BasicRoi& roi, int width, int height);

/// Pixel ownership map of a full partition: each pixel belongs to the lowest
/// numbered basic RoI whose closed polygon contains its centre; 0 = unowned.
class RegionMap {
 public:
  RegionMap(std::span<const BasicRoi> rois, int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int owner(int col, int row) const {
    return owner_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(col)];
  }
  Bitmap mask(int roi_no) const;
  std::size_t pixel_count(int roi_no) const;
  std::size_t unowned_count() const;
  /// Pixels whose centre sits on a boundary shared by more than one polygon.
  std::size_t contested_count() const noexcept { return contested_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> owner_;
  std::size_t contested_ = 0;
};

/// 64-bit FNV-1a, used for content-addressed cache keys and version hashes.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace aurk
