#include "aurk/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "aurk/error.hpp"

namespace aurk {

AuBox mirror_box(const AuBox& box, double image_width) {
  AuBox out = box;
  out.x_min = image_width - box.x_max;
  out.x_max = image_width - box.x_min;
  return out;
}

Preprocessed preprocess(const Tensor4& image, std::span<const AuBox> boxes, bool mirror,
                        std::span<const double> mean_pixel) {
  if (image.n() != 1) throw ShapeError("preprocess expects a single image");
  if (!mean_pixel.empty() && mean_pixel.size() != static_cast<std::size_t>(image.c()))
    throw ShapeError("mean pixel has " + std::to_string(mean_pixel.size()) + " channels, image " +
                     std::to_string(image.c()));
  Preprocessed out{Tensor4(image.shape()), {boxes.begin(), boxes.end()}};
  const int w = image.w();
  for (int c = 0; c < image.c(); ++c) {
    const double m = mean_pixel.empty() ? 0.0 : mean_pixel[static_cast<std::size_t>(c)];
    for (int y = 0; y < image.h(); ++y)
      for (int x = 0; x < w; ++x) out.image.at(0, c, y, mirror ? w - 1 - x : x) = image.at(0, c, y, x) - m;
  }
  if (mirror) {
    for (AuBox& b : out.boxes) b = mirror_box(b, w);
    for (std::size_t i = 0; i + 1 < out.boxes.size(); ++i) {
      AuBox& a = out.boxes[i];
      AuBox& b = out.boxes[i + 1];
      if (a.group_id == b.group_id && a.side == BoxSide::left && b.side == BoxSide::right) {
        std::swap(a, b);
        std::swap(a.side, b.side);
        ++i;
      }
    }
  }
  return out;
}

int fpn_level(double w, double h, int k0, int k_min, int k_max) {
  if (!(w > 0.0) || !(h > 0.0)) throw ShapeError("RoI size must be positive");
  const int k = k0 + static_cast<int>(std::floor(std::log2(std::sqrt(w * h) / 224.0)));
  return std::clamp(k, k_min, k_max);
}

}  // namespace aurk
