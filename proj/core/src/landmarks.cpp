#include "aurk/landmarks.hpp"

#include <algorithm>
#include <cmath>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"

namespace aurk {

Landmarks68 make_landmarks(std::span<const Point> points, int image_width, int image_height) {
  if (points.size() != static_cast<std::size_t>(kLandmarkCount))
    throw FormatError("expected 68 landmark points, got " + std::to_string(points.size()));
  if (image_width <= 0 || image_height <= 0)
    throw FormatError("image size must be positive");
  Landmarks68 lm;
  lm.image_width = image_width;
  lm.image_height = image_height;
  const double x_hi = image_width - 1;
  const double y_hi = image_height - 1;
  for (int i = 0; i < kLandmarkCount; ++i) {
    Point p = points[static_cast<std::size_t>(i)];
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw FormatError("landmark " + std::to_string(i) + " is not finite");
    const Point clamped{std::clamp(p.x, 0.0, x_hi), std::clamp(p.y, 0.0, y_hi)};
    if (!(clamped == p)) ++lm.clamp_count;
    lm.points[static_cast<std::size_t>(i)] = clamped;
  }
  return lm;
}

LandmarkRecord parse_landmark_record(std::string_view line) {
  const auto fields = csv::split(line);
  const std::string frame_id(fields.empty() ? std::string_view{} : fields.front());
  try {
    if (fields.size() < 3) throw FormatError("too few fields");
    const std::size_t coords = fields.size() - 3;
    if (coords % 2 != 0 || coords / 2 != static_cast<std::size_t>(kLandmarkCount))
      throw FormatError("expected 68 coordinate pairs, got " +
                        (coords % 2 == 0 ? std::to_string(coords / 2)
                                         : std::to_string(coords) + " coordinates"));
    std::vector<Point> pts(kLandmarkCount);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      pts[i].x = csv::parse_double(fields[1 + 2 * i], "x" + std::to_string(i));
      pts[i].y = csv::parse_double(fields[2 + 2 * i], "y" + std::to_string(i));
    }
    const int width = csv::parse_int(fields[fields.size() - 2], "width");
    const int height = csv::parse_int(fields[fields.size() - 1], "height");
    return LandmarkRecord{frame_id, make_landmarks(pts, width, height)};
  } catch (const FormatError& e) {
    throw FormatError("frame '" + frame_id + "': " + e.what());
  }
}

std::string format_landmark_record(const LandmarkRecord& record) {
  std::string out = record.frame_id;
  for (const Point& p : record.landmarks.points) {
    out += ',';
    out += csv::format_double(p.x);
    out += ',';
    out += csv::format_double(p.y);
  }
  out += ',' + std::to_string(record.landmarks.image_width);
  out += ',' + std::to_string(record.landmarks.image_height);
  return out;
}

std::vector<LandmarkRecord> parse_landmark_file(std::string_view text) {
  std::vector<LandmarkRecord> out;
  for (std::string_view line : csv::content_lines(text)) {
    if (line.rfind("frame_id", 0) == 0) continue;  // optional header
    out.push_back(parse_landmark_record(line));
  }
  return out;
}

std::vector<LandmarkRecord> read_landmark_file(const std::string& path) {
  return parse_landmark_file(csv::read_text_file(path));
}

void write_landmark_file(const std::string& path, std::span<const LandmarkRecord> records) {
  std::string text;
  for (const auto& r : records) {
    text += format_landmark_record(r);
    text += '\n';
  }
  csv::write_text_file(path, text);
}

Landmarks68 translated(const Landmarks68& lm, double dx, double dy) {
  Landmarks68 out = lm;
  for (Point& p : out.points) {
    p.x += dx;
    p.y += dy;
  }
  return out;
}

}  // namespace aurk
