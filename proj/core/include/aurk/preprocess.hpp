#pragma once

#include <array>
#include <span>
#include <vector>

#include "aurk/au_mask.hpp"
#include "aurk/tensor.hpp"

namespace aurk {

struct Preprocessed {
  Tensor4 image;
  std::vector<AuBox> boxes;
};

/// Subtracts the per-channel mean from a (1, C, H, W) image and, when
/// `mirror` is set, flips it horizontally: pixel column c goes to W-1-c and a
/// box (y0, x0, y1, x1) becomes (y0, W-x1, y1, W-x0). Left and right boxes of
/// a symmetric group trade places so rows stay in slot order.
Preprocessed preprocess(const Tensor4& image, std::span<const AuBox> boxes, bool mirror,
                        std::span<const double> mean_pixel);

/// Horizontal flip of box coordinates only.
AuBox mirror_box(const AuBox& box, double image_width);

/// Pyramid level for a w x h RoI: k0 + floor(log2(sqrt(w*h) / 224)), clamped
/// to [k_min, k_max].
int fpn_level(double w, double h, int k0, int k_min = 2, int k_max = 5);

}  // namespace aurk
