#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/geometry.hpp"
#include "aurk/partition_table.hpp"
#include "aurk/roi_layout.hpp"

namespace aurk {

enum class BoxSpace { image, feature };

/// Axis-aligned box in (y_min, x_min, y_max, x_max) order. In image space the
/// coordinates are pixel edges: a box around pixels rows 10..29, cols 20..39
/// is (10, 20, 30, 40).
struct AuBox {
  int group_id = 0;
  BoxSide side = BoxSide::whole;
  double y_min = 0.0;
  double x_min = 0.0;
  double y_max = 0.0;
  double x_max = 0.0;
  BoxSpace space = BoxSpace::image;

  double height() const noexcept { return y_max - y_min; }
  double width() const noexcept { return x_max - x_min; }
  double area() const noexcept { return height() * width(); }
  std::array<double, 4> coords() const noexcept { return {y_min, x_min, y_max, x_max}; }

  friend bool operator==(const AuBox&, const AuBox&) = default;
};

struct RoiMask {
  int roi_no = 0;
  Bitmap bits;
};

struct AuMask {
  int group_id = 0;
  Bitmap bits;
};

/// One mask per basic RoI, taken from the ownership map.
std::vector<RoiMask> roi_masks(const RegionMap& regions);

/// Union of the group's member RoI masks. Throws MissingRegionError when a
/// member RoI is absent from `rois`.
AuMask compose_au_mask(int group_id, std::span<const RoiMask> rois, const PartitionTable& table);
AuMask compose_au_mask(int group_id, const RegionMap& regions, const PartitionTable& table);

/// Tight hull of the set pixels of `bits`. Throws EmptyMaskError if none.
AuBox tight_box(const Bitmap& bits, int group_id, BoxSide side = BoxSide::whole);

/// One box for an ordinary group; two for a symmetric group, split at the
/// vertical line x = `split_x` (pixel centres left of it go to the left box).
/// Throws EmptyMaskError for an empty mask or an empty side.
std::vector<AuBox> mask_to_boxes(const AuMask& mask, const PartitionTable& table, double split_x);

/// Divides every coordinate by `stride` (no rounding). Throws ShapeError for
/// stride < 1 or a box already in feature space.
AuBox scale_box_to_feature(const AuBox& box, int stride);

/// Full per-image box list in the table's slot order (R boxes).
std::vector<AuBox> face_boxes(const Landmarks68& lm, const PartitionTable& table,
                              const RoiLayout& layout = RoiLayout::builtin());

/// Streaming per-slot coordinate means. Partial accumulators merge exactly
/// like one long stream.
class MeanBoxAccumulator {
 public:
  /// The first frame fixes the slot layout; later frames must match it.
  void add(std::span<const AuBox> frame);
  void merge(const MeanBoxAccumulator& other);
  std::size_t frames() const noexcept { return frames_; }
  /// Throws EmptyDatasetError before the first frame.
  std::vector<AuBox> mean() const;

 private:
  std::vector<AuBox> layout_;
  std::vector<std::array<double, 4>> sums_;
  std::size_t frames_ = 0;
};

std::vector<AuBox> compute_mean_boxes(std::span<const std::vector<AuBox>> frames);

/// Mean-box CSV: `group,au_index,y_min,x_min,y_max,x_max`, one row per box in
/// slot order; `au_index` lists the group's AU numbers separated by spaces.
std::string format_mean_box_csv(std::span<const AuBox> boxes, const PartitionTable& table);
/// Inverse of `format_mean_box_csv`; rows must follow the table's slots.
std::vector<AuBox> parse_mean_box_csv(std::string_view text, const PartitionTable& table);

/// "(30.4, 58.1, 140.3, 222.5)" with shortest round-trip numbers.
std::string format_box_tuple(const std::array<double, 4>& coords);
std::array<double, 4> parse_box_tuple(std::string_view text);

struct AreaStat {
  int group_id = 0;
  std::size_t frames = 0;
  double avg_area = 0.0;    // pixels
  double proportion = 0.0;  // percent of width x height, unrounded
};

/// Per-group average area. A symmetric group's area is the sum of both sides.
class AreaAccumulator {
 public:
  AreaAccumulator(int image_width, int image_height);
  void add(int group_id, double area);
  void add_boxes(std::span<const AuBox> frame);
  void add_mask(const AuMask& mask);
  std::vector<AreaStat> result() const;

 private:
  int width_;
  int height_;
  std::vector<std::pair<int, std::pair<double, std::size_t>>> sums_;  // group -> (sum, n)
};

/// "6.8%" style, one decimal.
std::string format_percent(double percent);

}  // namespace aurk
