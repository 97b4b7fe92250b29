#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aurk/tensor.hpp"

namespace aurk {

// Hand-written forward/backward kernels. Backward functions accumulate into
// the parameters' gradient buffers (`Tensor4::grad()`) and return the
// gradient with respect to the layer input.

/// Cross-correlation. weight: (out_c, in_c, kh, kw); bias: (1, out_c, 1, 1) or null.
Tensor4 conv2d(const Tensor4& x, const Tensor4& weight, const Tensor4* bias, int stride, int pad);
Tensor4 conv2d_backward(const Tensor4& x, Tensor4& weight, Tensor4* bias, int stride, int pad,
                        const Tensor4& dy);

/// y = x W^T + b. x: (n, in); weight: (out, in, 1, 1); bias: (1, out, 1, 1) or null.
Matrix linear(const Matrix& x, const Tensor4& weight, const Tensor4* bias);
Matrix linear_backward(const Matrix& x, Tensor4& weight, Tensor4* bias, const Matrix& dy);

Tensor4 relu(const Tensor4& x);
/// `y` is the forward output.
Tensor4 relu_backward(const Tensor4& y, const Tensor4& dy);
Matrix relu(const Matrix& x);
Matrix relu_backward(const Matrix& y, const Matrix& dy);

/// (n, c, h, w) <-> (n, c*h*w) without moving data.
Matrix flatten(const Tensor4& x);
Tensor4 unflatten(const Matrix& m, Shape4 shape);

/// Box on a feature map, in feature-cell units, for image `batch_index`.
struct RoiBox {
  int batch_index = 0;
  double y_min = 0.0;
  double x_min = 0.0;
  double y_max = 0.0;
  double x_max = 0.0;
};

struct RoiSpec {
  std::vector<RoiBox> boxes;
  int out_h = 7;
  int out_w = 7;
};

/// Integer cell range [y0, y1) x [x0, x1) covered by a box.
struct QuantizedBox {
  int y0 = 0;
  int x0 = 0;
  int y1 = 0;
  int x1 = 0;
  bool collapsed = false;  // quantized to zero size; replaced by one cell
};

/// floor(min) / ceil(max), clamped to the map. A box with no cells left
/// becomes the single cell at its clamped top-left corner.
QuantizedBox quantize_box(const RoiBox& box, int height, int width);

/// Bin boundaries splitting `length` cells into `bins` runs, first runs one
/// cell longer when it does not divide evenly. Returns bins + 1 offsets.
std::vector<int> bin_edges(int start, int length, int bins);

struct RoiPoolResult {
  Tensor4 output;                     // (R, C, out_h, out_w)
  std::vector<std::int64_t> argmax;   // flat feature index per output cell; -1 for an empty bin
  std::vector<std::uint8_t> collapsed;  // per box
};

/// Max pooling of every box into an out_h x out_w grid. Empty bins yield 0.
/// Ties resolve to the lowest flat index.
RoiPoolResult roi_pool(const Tensor4& feature, const RoiSpec& spec);
/// Routes each output gradient to its argmax cell.
Tensor4 roi_pool_backward(const Shape4& feature_shape, const RoiPoolResult& forward, const Tensor4& dy);

/// Weights drawn from N(0, 2 / fan_in); fan_in = c * h * w of the weight.
void he_normal(Tensor4& weight, std::mt19937_64& rng);
void normal_fill(Tensor4& weight, double stddev, std::mt19937_64& rng);

/// fc -> ReLU -> fc, mapping (rows, in) features to (rows, out) logits.
class FcHead {
 public:
  struct Trace {
    Matrix input;
    Matrix hidden;  // after ReLU
  };

  FcHead() = default;
  FcHead(const std::string& prefix, int in_features, int hidden, int out_features);

  Matrix forward(const Matrix& x, Trace* trace) const;
  /// Accumulates parameter gradients; returns d loss / d input.
  Matrix backward(const Trace& trace, const Matrix& dlogits);

  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);
  int in_features() const noexcept { return fc1_w.value.c(); }

  Param fc1_w, fc1_b, fc2_w, fc2_b;
};

}  // namespace aurk
