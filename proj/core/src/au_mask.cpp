#include "aurk/au_mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"

namespace aurk {

std::vector<RoiMask> roi_masks(const RegionMap& regions) {
  std::vector<RoiMask> out;
  out.reserve(kBasicRoiCount);
  for (int r = 1; r <= kBasicRoiCount; ++r) out.push_back({r, regions.mask(r)});
  return out;
}

AuMask compose_au_mask(int group_id, std::span<const RoiMask> rois, const PartitionTable& table) {
  const AuGroup& g = table.group(group_id);
  AuMask out{group_id, {}};
  bool first = true;
  for (int r : g.rois) {
    const auto it = std::find_if(rois.begin(), rois.end(),
                                 [r](const RoiMask& m) { return m.roi_no == r; });
    if (it == rois.end())
      throw MissingRegionError("AU group " + std::to_string(group_id) + " needs basic RoI " +
                               std::to_string(r));
    if (first) {
      out.bits = it->bits;
      first = false;
    } else {
      out.bits |= it->bits;
    }
  }
  return out;
}

AuMask compose_au_mask(int group_id, const RegionMap& regions, const PartitionTable& table) {
  const AuGroup& g = table.group(group_id);
  std::array<bool, kBasicRoiCount + 1> member{};
  for (int r : g.rois) member[static_cast<std::size_t>(r)] = true;
  AuMask out{group_id, Bitmap(regions.width(), regions.height())};
  for (int row = 0; row < regions.height(); ++row)
    for (int col = 0; col < regions.width(); ++col)
      if (member[static_cast<std::size_t>(regions.owner(col, row))]) out.bits.set(col, row);
  return out;
}

namespace {

// Hull of set pixels restricted to columns [col_lo, col_hi).
bool hull(const Bitmap& bits, int col_lo, int col_hi, AuBox& box) {
  int r0 = std::numeric_limits<int>::max(), c0 = r0, r1 = -1, c1 = -1;
  for (int row = 0; row < bits.height(); ++row)
    for (int col = col_lo; col < col_hi; ++col)
      if (bits.get(col, row)) {
        r0 = std::min(r0, row);
        r1 = std::max(r1, row);
        c0 = std::min(c0, col);
        c1 = std::max(c1, col);
      }
  if (r1 < 0) return false;
  box.y_min = r0;
  box.x_min = c0;
  box.y_max = r1 + 1;
  box.x_max = c1 + 1;
  box.space = BoxSpace::image;
  return true;
}

}  // namespace

AuBox tight_box(const Bitmap& bits, int group_id, BoxSide side) {
  AuBox box{group_id, side};
  if (!hull(bits, 0, bits.width(), box))
    throw EmptyMaskError("AU group " + std::to_string(group_id) + " mask is empty");
  return box;
}

std::vector<AuBox> mask_to_boxes(const AuMask& mask, const PartitionTable& table, double split_x) {
  const AuGroup& g = table.group(mask.group_id);
  if (!g.symmetric) return {tight_box(mask.bits, g.group_id)};
  // Pixel centre col + 0.5 < split_x  <=>  col < ceil(split_x - 0.5).
  const int split_col = std::clamp(static_cast<int>(std::ceil(split_x - 0.5)), 0, mask.bits.width());
  AuBox left{g.group_id, BoxSide::left};
  AuBox right{g.group_id, BoxSide::right};
  if (!hull(mask.bits, 0, split_col, left))
    throw EmptyMaskError("AU group " + std::to_string(g.group_id) + " has an empty left side");
  if (!hull(mask.bits, split_col, mask.bits.width(), right))
    throw EmptyMaskError("AU group " + std::to_string(g.group_id) + " has an empty right side");
  return {left, right};
}

AuBox scale_box_to_feature(const AuBox& box, int stride) {
  if (stride < 1) throw ShapeError("feature stride must be >= 1");
  if (box.space != BoxSpace::image) throw ShapeError("box is already in feature space");
  AuBox out = box;
  const double s = stride;
  out.y_min /= s;
  out.x_min /= s;
  out.y_max /= s;
  out.x_max /= s;
  out.space = BoxSpace::feature;
  return out;
}

std::vector<AuBox> face_boxes(const Landmarks68& lm, const PartitionTable& table,
                              const RoiLayout& layout) {
  const DerivedPoints dp = layout.derive(lm);
  const auto rois = layout.partition(lm, dp);
  const RegionMap regions(rois, lm.image_width, lm.image_height);
  const double split_x = dp.at("face_center").x;
  std::vector<AuBox> out;
  out.reserve(table.slots().size());
  for (const AuGroup& g : table.groups()) {
    const auto boxes = mask_to_boxes(compose_au_mask(g.group_id, regions, table), table, split_x);
    out.insert(out.end(), boxes.begin(), boxes.end());
  }
  return out;
}

void MeanBoxAccumulator::add(std::span<const AuBox> frame) {
  if (frames_ == 0 && layout_.empty()) {
    layout_.assign(frame.begin(), frame.end());
    sums_.assign(frame.size(), {0.0, 0.0, 0.0, 0.0});
  }
  if (frame.size() != layout_.size())
    throw ShapeError("frame has " + std::to_string(frame.size()) + " boxes, expected " +
                     std::to_string(layout_.size()));
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame[i].group_id != layout_[i].group_id || frame[i].side != layout_[i].side)
      throw ShapeError("box " + std::to_string(i) + " belongs to a different slot");
    const auto c = frame[i].coords();
    for (std::size_t k = 0; k < 4; ++k) sums_[i][k] += c[k];
  }
  ++frames_;
}

void MeanBoxAccumulator::merge(const MeanBoxAccumulator& other) {
  if (other.frames_ == 0) return;
  if (frames_ == 0) {
    *this = other;
    return;
  }
  if (other.layout_.size() != layout_.size()) throw ShapeError("cannot merge different box layouts");
  for (std::size_t i = 0; i < sums_.size(); ++i)
    for (std::size_t k = 0; k < 4; ++k) sums_[i][k] += other.sums_[i][k];
  frames_ += other.frames_;
}

std::vector<AuBox> MeanBoxAccumulator::mean() const {
  if (frames_ == 0) throw EmptyDatasetError("no frames to average");
  std::vector<AuBox> out = layout_;
  const double n = static_cast<double>(frames_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].y_min = sums_[i][0] / n;
    out[i].x_min = sums_[i][1] / n;
    out[i].y_max = sums_[i][2] / n;
    out[i].x_max = sums_[i][3] / n;
  }
  return out;
}

std::vector<AuBox> compute_mean_boxes(std::span<const std::vector<AuBox>> frames) {
  MeanBoxAccumulator acc;
  for (const auto& f : frames) acc.add(f);
  return acc.mean();
}

std::string format_mean_box_csv(std::span<const AuBox> boxes, const PartitionTable& table) {
  const auto slots = table.slots();
  if (boxes.size() != slots.size())
    throw ShapeError("expected " + std::to_string(slots.size()) + " mean boxes");
  std::string out = "group,au_index,y_min,x_min,y_max,x_max\n";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const AuBox& b = boxes[i];
    if (b.group_id != slots[i].group_id || b.side != slots[i].side)
      throw ShapeError("mean box " + std::to_string(i) + " is out of slot order");
    out += std::to_string(b.group_id) + ',';
    const auto& aus = table.group(b.group_id).aus;
    for (std::size_t k = 0; k < aus.size(); ++k) {
      if (k) out += ' ';
      out += std::to_string(aus[k]);
    }
    for (double v : b.coords()) out += ',' + csv::format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<AuBox> parse_mean_box_csv(std::string_view text, const PartitionTable& table) {
  const auto lines = csv::content_lines(text);
  const auto slots = table.slots();
  if (lines.empty() || lines.front().rfind("group,", 0) != 0)
    throw FormatError("mean-box CSV must start with its header row");
  if (lines.size() - 1 != slots.size())
    throw FormatError("mean-box CSV has " + std::to_string(lines.size() - 1) + " rows, expected " +
                      std::to_string(slots.size()));
  std::vector<AuBox> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split(lines[i]);
    if (f.size() != 6) throw FormatError("mean-box row " + std::to_string(i) + " needs 6 fields");
    const BoxSlot& slot = slots[i - 1];
    const int gid = csv::parse_int(f[0], "group");
    if (gid != slot.group_id)
      throw FormatError("mean-box row " + std::to_string(i) + " is group " + std::to_string(gid) +
                        ", expected " + std::to_string(slot.group_id));
    AuBox b{gid, slot.side};
    b.y_min = csv::parse_double(f[2], "y_min");
    b.x_min = csv::parse_double(f[3], "x_min");
    b.y_max = csv::parse_double(f[4], "y_max");
    b.x_max = csv::parse_double(f[5], "x_max");
    out.push_back(b);
  }
  return out;
}

std::string format_box_tuple(const std::array<double, 4>& coords) {
  std::string out = "(";
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) out += ", ";
    out += csv::format_double(coords[i]);
  }
  return out + ")";
}

std::array<double, 4> parse_box_tuple(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.size() < 2 || text.front() != '(' || text.back() != ')')
    throw FormatError("box tuple must be parenthesised: '" + std::string(text) + "'");
  const auto f = csv::split(text.substr(1, text.size() - 2));
  if (f.size() != 4) throw FormatError("box tuple needs 4 numbers: '" + std::string(text) + "'");
  return {csv::parse_double(f[0], "y_min"), csv::parse_double(f[1], "x_min"),
          csv::parse_double(f[2], "y_max"), csv::parse_double(f[3], "x_max")};
}

AreaAccumulator::AreaAccumulator(int image_width, int image_height)
    : width_(image_width), height_(image_height) {
  if (image_width <= 0 || image_height <= 0) throw ShapeError("image size must be positive");
}

void AreaAccumulator::add(int group_id, double area) {
  auto it = std::find_if(sums_.begin(), sums_.end(), [&](const auto& e) { return e.first == group_id; });
  if (it == sums_.end()) {
    sums_.push_back({group_id, {0.0, 0}});
    it = sums_.end() - 1;
  }
  it->second.first += area;
  ++it->second.second;
}

void AreaAccumulator::add_boxes(std::span<const AuBox> frame) {
  std::map<int, double> per_group;
  for (const AuBox& b : frame) per_group[b.group_id] += b.area();
  for (const auto& [gid, area] : per_group) add(gid, area);
}

void AreaAccumulator::add_mask(const AuMask& mask) {
  if (mask.bits.width() != width_ || mask.bits.height() != height_)
    throw ShapeError("mask size differs from the accumulator's image size");
  add(mask.group_id, static_cast<double>(mask.bits.count()));
}

std::vector<AreaStat> AreaAccumulator::result() const {
  std::vector<AreaStat> out;
  const double image_area = static_cast<double>(width_) * static_cast<double>(height_);
  for (const auto& [gid, acc] : sums_) {
    AreaStat s;
    s.group_id = gid;
    s.frames = acc.second;
    s.avg_area = acc.first / static_cast<double>(acc.second);
    s.proportion = s.avg_area / image_area * 100.0;
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const AreaStat& a, const AreaStat& b) { return a.group_id < b.group_id; });
  return out;
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", percent);
  return buf;
}

}  // namespace aurk
