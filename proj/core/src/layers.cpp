#include "aurk/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aurk/error.hpp"

namespace aurk {

namespace {

int conv_out(int in, int k, int stride, int pad) {
  if (stride < 1) throw ShapeError("conv stride must be >= 1");
  if (pad < 0) throw ShapeError("conv padding must be >= 0");
  const int span = in + 2 * pad - k;
  if (span < 0) throw ShapeError("conv kernel larger than padded input");
  return span / stride + 1;
}

// Output positions o with 0 <= o*stride + k - pad < in.
void valid_range(int k, int stride, int pad, int in, int out, int& lo, int& hi) {
  const int first = pad - k;  // need o*stride >= first
  lo = first <= 0 ? 0 : (first + stride - 1) / stride;
  const int last = in - 1 + pad - k;  // need o*stride <= last
  hi = last < 0 ? -1 : std::min(out - 1, last / stride);
}

void check_conv_shapes(const Tensor4& x, const Tensor4& weight, const Tensor4* bias) {
  if (weight.c() != x.c())
    throw ShapeError("conv input has " + std::to_string(x.c()) + " channels, kernel expects " +
                     std::to_string(weight.c()));
  if (bias && (bias->size() != static_cast<std::size_t>(weight.n())))
    throw ShapeError("conv bias size differs from output channels");
}

}  // namespace

Tensor4 conv2d(const Tensor4& x, const Tensor4& weight, const Tensor4* bias, int stride, int pad) {
  check_conv_shapes(x, weight, bias);
  const int kh = weight.h(), kw = weight.w();
  const int ho = conv_out(x.h(), kh, stride, pad);
  const int wo = conv_out(x.w(), kw, stride, pad);
  Tensor4 y({x.n(), weight.n(), ho, wo});
  const auto xv = x.values();
  const auto wv = weight.values();
  auto yv = y.values();
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < weight.n(); ++o) {
      double* yplane = &yv[y.offset(n, o, 0, 0)];
      if (bias) std::fill(yplane, yplane + static_cast<std::ptrdiff_t>(ho) * wo, bias->values()[static_cast<std::size_t>(o)]);
      for (int c = 0; c < x.c(); ++c)
        for (int ky = 0; ky < kh; ++ky) {
          int oy_lo, oy_hi;
          valid_range(ky, stride, pad, x.h(), ho, oy_lo, oy_hi);
          for (int kx = 0; kx < kw; ++kx) {
            int ox_lo, ox_hi;
            valid_range(kx, stride, pad, x.w(), wo, ox_lo, ox_hi);
            const double k = wv[weight.offset(o, c, ky, kx)];
            for (int oy = oy_lo; oy <= oy_hi; ++oy) {
              const double* xrow = &xv[x.offset(n, c, oy * stride + ky - pad, 0)];
              double* yrow = yplane + static_cast<std::ptrdiff_t>(oy) * wo;
              for (int ox = ox_lo; ox <= ox_hi; ++ox) yrow[ox] += k * xrow[ox * stride + kx - pad];
            }
          }
        }
    }
  return y;
}

Tensor4 conv2d_backward(const Tensor4& x, Tensor4& weight, Tensor4* bias, int stride, int pad,
                        const Tensor4& dy) {
  check_conv_shapes(x, weight, bias);
  const int kh = weight.h(), kw = weight.w();
  const int ho = conv_out(x.h(), kh, stride, pad);
  const int wo = conv_out(x.w(), kw, stride, pad);
  if (!(dy.shape() == Shape4{x.n(), weight.n(), ho, wo}))
    throw ShapeError("conv output gradient has shape " + dy.shape().str());
  Tensor4 dx(x.shape());
  const auto xv = x.values();
  const auto wv = weight.values();
  const auto dyv = dy.values();
  auto dxv = dx.values();
  auto dw = weight.grad();
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < weight.n(); ++o) {
      const double* dplane = &dyv[dy.offset(n, o, 0, 0)];
      if (bias) {
        double s = 0.0;
        for (int i = 0; i < ho * wo; ++i) s += dplane[i];
        bias->grad()[static_cast<std::size_t>(o)] += s;
      }
      for (int c = 0; c < x.c(); ++c)
        for (int ky = 0; ky < kh; ++ky) {
          int oy_lo, oy_hi;
          valid_range(ky, stride, pad, x.h(), ho, oy_lo, oy_hi);
          for (int kx = 0; kx < kw; ++kx) {
            int ox_lo, ox_hi;
            valid_range(kx, stride, pad, x.w(), wo, ox_lo, ox_hi);
            const std::size_t widx = weight.offset(o, c, ky, kx);
            const double k = wv[widx];
            double acc = 0.0;
            for (int oy = oy_lo; oy <= oy_hi; ++oy) {
              const std::size_t xoff = x.offset(n, c, oy * stride + ky - pad, 0);
              const double* xrow = &xv[xoff];
              double* dxrow = &dxv[xoff];
              const double* drow = dplane + static_cast<std::ptrdiff_t>(oy) * wo;
              for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                const int ix = ox * stride + kx - pad;
                acc += drow[ox] * xrow[ix];
                dxrow[ix] += k * drow[ox];
              }
            }
            dw[widx] += acc;
          }
        }
    }
  return dx;
}

Matrix linear(const Matrix& x, const Tensor4& weight, const Tensor4* bias) {
  const int out = weight.n();
  const int in = static_cast<int>(weight.size() / static_cast<std::size_t>(std::max(out, 1)));
  if (x.cols != in)
    throw ShapeError("linear input has " + std::to_string(x.cols) + " features, weight expects " +
                     std::to_string(in));
  if (bias && bias->size() != static_cast<std::size_t>(out)) throw ShapeError("linear bias size mismatch");
  Matrix y(x.rows, out);
  const auto wv = weight.values();
  for (int r = 0; r < x.rows; ++r) {
    const auto xr = x.row(r);
    for (int o = 0; o < out; ++o) {
      const double* w = &wv[static_cast<std::size_t>(o) * static_cast<std::size_t>(in)];
      double s = bias ? bias->values()[static_cast<std::size_t>(o)] : 0.0;
      for (int i = 0; i < in; ++i) s += w[i] * xr[static_cast<std::size_t>(i)];
      y(r, o) = s;
    }
  }
  return y;
}

Matrix linear_backward(const Matrix& x, Tensor4& weight, Tensor4* bias, const Matrix& dy) {
  const int out = weight.n();
  const int in = x.cols;
  if (dy.rows != x.rows || dy.cols != out) throw ShapeError("linear output gradient shape mismatch");
  if (weight.size() != static_cast<std::size_t>(out) * static_cast<std::size_t>(in))
    throw ShapeError("linear weight shape mismatch");
  Matrix dx(x.rows, in);
  const auto wv = weight.values();
  auto dw = weight.grad();
  for (int r = 0; r < x.rows; ++r) {
    const auto xr = x.row(r);
    auto dxr = dx.row(r);
    for (int o = 0; o < out; ++o) {
      const double g = dy(r, o);
      if (g == 0.0) continue;
      const std::size_t base = static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
      for (int i = 0; i < in; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        dxr[ii] += g * wv[base + ii];
        dw[base + ii] += g * xr[ii];
      }
      if (bias) bias->grad()[static_cast<std::size_t>(o)] += g;
    }
  }
  return dx;
}

Tensor4 relu(const Tensor4& x) {
  Tensor4 y(x.shape());
  auto yv = y.values();
  const auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return y;
}

Tensor4 relu_backward(const Tensor4& y, const Tensor4& dy) {
  if (!(y.shape() == dy.shape())) throw ShapeError("relu gradient shape mismatch");
  Tensor4 dx(y.shape());
  auto dxv = dx.values();
  const auto yv = y.values();
  const auto dyv = dy.values();
  for (std::size_t i = 0; i < yv.size(); ++i) dxv[i] = yv[i] > 0.0 ? dyv[i] : 0.0;
  return dx;
}

Matrix relu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Matrix relu_backward(const Matrix& y, const Matrix& dy) {
  if (y.rows != dy.rows || y.cols != dy.cols) throw ShapeError("relu gradient shape mismatch");
  Matrix dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i)
    if (!(y.data[i] > 0.0)) dx.data[i] = 0.0;
  return dx;
}

Matrix flatten(const Tensor4& x) {
  Matrix m(x.n(), x.c() * x.h() * x.w());
  std::copy(x.values().begin(), x.values().end(), m.data.begin());
  return m;
}

Tensor4 unflatten(const Matrix& m, Shape4 shape) {
  if (shape.n != m.rows || shape.size() != m.data.size())
    throw ShapeError("cannot unflatten " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                     " to " + shape.str());
  Tensor4 t(shape);
  std::copy(m.data.begin(), m.data.end(), t.values().begin());
  return t;
}

QuantizedBox quantize_box(const RoiBox& box, int height, int width) {
  QuantizedBox q;
  q.y0 = std::clamp(static_cast<int>(std::floor(box.y_min)), 0, height - 1);
  q.x0 = std::clamp(static_cast<int>(std::floor(box.x_min)), 0, width - 1);
  q.y1 = std::clamp(static_cast<int>(std::ceil(box.y_max)), 0, height);
  q.x1 = std::clamp(static_cast<int>(std::ceil(box.x_max)), 0, width);
  if (q.y1 <= q.y0 || q.x1 <= q.x0) {
    q.collapsed = true;
    q.y1 = q.y0 + 1;
    q.x1 = q.x0 + 1;
  }
  return q;
}

std::vector<int> bin_edges(int start, int length, int bins) {
  std::vector<int> edges(static_cast<std::size_t>(bins) + 1);
  const int base = length / bins;
  const int extra = length % bins;
  edges[0] = start;
  for (int i = 0; i < bins; ++i)
    edges[static_cast<std::size_t>(i) + 1] = edges[static_cast<std::size_t>(i)] + base + (i < extra ? 1 : 0);
  return edges;
}

RoiPoolResult roi_pool(const Tensor4& feature, const RoiSpec& spec) {
  if (spec.out_h < 1 || spec.out_w < 1) throw ShapeError("RoI output size must be at least 1x1");
  if (feature.h() < 1 || feature.w() < 1) throw ShapeError("empty feature map");
  const int r_count = static_cast<int>(spec.boxes.size());
  RoiPoolResult res;
  res.output = Tensor4({r_count, feature.c(), spec.out_h, spec.out_w});
  res.argmax.assign(res.output.size(), -1);
  res.collapsed.assign(spec.boxes.size(), 0);
  const auto fv = feature.values();
  auto ov = res.output.values();
  for (int r = 0; r < r_count; ++r) {
    const RoiBox& box = spec.boxes[static_cast<std::size_t>(r)];
    if (box.batch_index < 0 || box.batch_index >= feature.n())
      throw ShapeError("RoI batch index " + std::to_string(box.batch_index) + " out of range");
    const QuantizedBox q = quantize_box(box, feature.h(), feature.w());
    res.collapsed[static_cast<std::size_t>(r)] = q.collapsed ? 1 : 0;
    const auto ye = bin_edges(q.y0, q.y1 - q.y0, spec.out_h);
    const auto xe = bin_edges(q.x0, q.x1 - q.x0, spec.out_w);
    for (int c = 0; c < feature.c(); ++c)
      for (int by = 0; by < spec.out_h; ++by)
        for (int bx = 0; bx < spec.out_w; ++bx) {
          double best = 0.0;
          std::int64_t arg = -1;
          for (int y = ye[static_cast<std::size_t>(by)]; y < ye[static_cast<std::size_t>(by) + 1]; ++y)
            for (int x = xe[static_cast<std::size_t>(bx)]; x < xe[static_cast<std::size_t>(bx) + 1]; ++x) {
              const std::size_t idx = feature.offset(box.batch_index, c, y, x);
              if (arg < 0 || fv[idx] > best) {
                best = fv[idx];
                arg = static_cast<std::int64_t>(idx);
              }
            }
          const std::size_t o = res.output.offset(r, c, by, bx);
          ov[o] = arg < 0 ? 0.0 : best;
          res.argmax[o] = arg;
        }
  }
  return res;
}

Tensor4 roi_pool_backward(const Shape4& feature_shape, const RoiPoolResult& forward, const Tensor4& dy) {
  if (!(dy.shape() == forward.output.shape())) throw ShapeError("RoI pool gradient shape mismatch");
  Tensor4 dx(feature_shape);
  auto dxv = dx.values();
  const auto dyv = dy.values();
  for (std::size_t i = 0; i < dyv.size(); ++i)
    if (forward.argmax[i] >= 0) dxv[static_cast<std::size_t>(forward.argmax[i])] += dyv[i];
  return dx;
}

void he_normal(Tensor4& weight, std::mt19937_64& rng) {
  const int fan_in = weight.c() * weight.h() * weight.w();
  normal_fill(weight, std::sqrt(2.0 / std::max(fan_in, 1)), rng);
}

void normal_fill(Tensor4& weight, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : weight.values()) v = dist(rng);
}

FcHead::FcHead(const std::string& prefix, int in_features, int hidden, int out_features)
    : fc1_w{prefix + "fc1.weight", Tensor4({hidden, in_features, 1, 1})},
      fc1_b{prefix + "fc1.bias", Tensor4({1, hidden, 1, 1})},
      fc2_w{prefix + "fc2.weight", Tensor4({out_features, hidden, 1, 1})},
      fc2_b{prefix + "fc2.bias", Tensor4({1, out_features, 1, 1})} {}

Matrix FcHead::forward(const Matrix& x, Trace* trace) const {
  Matrix hidden = relu(linear(x, fc1_w.value, &fc1_b.value));
  Matrix out = linear(hidden, fc2_w.value, &fc2_b.value);
  if (trace) {
    trace->input = x;
    trace->hidden = std::move(hidden);
  }
  return out;
}

Matrix FcHead::backward(const Trace& trace, const Matrix& dlogits) {
  const Matrix dhidden = linear_backward(trace.hidden, fc2_w.value, &fc2_b.value, dlogits);
  return linear_backward(trace.input, fc1_w.value, &fc1_b.value, relu_backward(trace.hidden, dhidden));
}

void FcHead::init(std::mt19937_64& rng) {
  he_normal(fc1_w.value, rng);
  normal_fill(fc2_w.value, 0.01, rng);
  std::fill(fc1_b.value.values().begin(), fc1_b.value.values().end(), 0.0);
  std::fill(fc2_b.value.values().begin(), fc2_b.value.values().end(), 0.0);
}

void FcHead::collect(std::vector<Param*>& out) {
  out.insert(out.end(), {&fc1_w, &fc1_b, &fc2_w, &fc2_b});
}

}  // namespace aurk
