#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/geometry.hpp"

namespace aurk {

inline constexpr int kLandmarkCount = 68;

/// 68 facial landmarks (0-based dlib/iBUG numbering) in pixel coordinates.
/// Coordinates are clamped into [0, width-1] x [0, height-1]; `clamp_count`
/// records how many points needed it.
struct Landmarks68 {
  std::array<Point, kLandmarkCount> points{};
  int image_width = 0;
  int image_height = 0;
  int clamp_count = 0;

  const Point& operator[](int i) const { return points[static_cast<std::size_t>(i)]; }
};

/// One row of a landmark file: `frame_id,x0,y0,...,x67,y67,width,height`.
struct LandmarkRecord {
  std::string frame_id;
  Landmarks68 landmarks;
};

/// Validates and clamps raw points. Throws FormatError on a wrong point count,
/// a non-finite coordinate or a non-positive image size.
Landmarks68 make_landmarks(std::span<const Point> points, int image_width, int image_height);

LandmarkRecord parse_landmark_record(std::string_view line);
std::string format_landmark_record(const LandmarkRecord& record);

/// Parses every non-empty line of a landmark file. Errors carry the frame id.
std::vector<LandmarkRecord> parse_landmark_file(std::string_view text);
std::vector<LandmarkRecord> read_landmark_file(const std::string& path);
void write_landmark_file(const std::string& path, std::span<const LandmarkRecord> records);

/// Applies `(x, y) -> (x + dx, y + dy)` to every point without re-clamping.
Landmarks68 translated(const Landmarks68& lm, double dx, double dy);

}  // namespace aurk
