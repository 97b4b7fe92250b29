#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace aurk {

struct Shape4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
           static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  std::string str() const;
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense NCHW array of doubles with an optional gradient buffer of the same
/// shape. The gradient is allocated on demand by `grad()`.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, double fill = 0.0);

  const Shape4& shape() const noexcept { return shape_; }
  int n() const noexcept { return shape_.n; }
  int c() const noexcept { return shape_.c; }
  int h() const noexcept { return shape_.h; }
  int w() const noexcept { return shape_.w; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t offset(int n, int c, int h, int w) const noexcept {
    return ((static_cast<std::size_t>(n) * static_cast<std::size_t>(shape_.c) +
             static_cast<std::size_t>(c)) * static_cast<std::size_t>(shape_.h) +
            static_cast<std::size_t>(h)) * static_cast<std::size_t>(shape_.w) +
           static_cast<std::size_t>(w);
  }
  double& at(int n, int c, int h, int w) noexcept { return values_[offset(n, c, h, w)]; }
  double at(int n, int c, int h, int w) const noexcept { return values_[offset(n, c, h, w)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool has_grad() const noexcept { return !grad_.empty(); }
  /// Gradient buffer, zero-initialised on first access.
  std::span<double> grad();
  std::span<const double> grad() const noexcept { return grad_; }
  void zero_grad();

  /// Same data viewed with a different shape of equal size. Drops the gradient.
  Tensor4 reshaped(Shape4 shape) const;

  /// Throws NumericError naming `what` if any value is NaN or infinite.
  void check_finite(const char* what) const;

 private:
  Shape4 shape_{};
  std::vector<double> values_;
  std::vector<double> grad_;
};

/// Row-major 2-D array, used for logits, labels and fully connected weights.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(int r, int c) noexcept {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
  double operator()(int r, int c) const noexcept {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
  std::span<double> row(int r) noexcept {
    return std::span<double>(data).subspan(static_cast<std::size_t>(r) * static_cast<std::size_t>(cols),
                                           static_cast<std::size_t>(cols));
  }
  std::span<const double> row(int r) const noexcept {
    return std::span<const double>(data).subspan(
        static_cast<std::size_t>(r) * static_cast<std::size_t>(cols), static_cast<std::size_t>(cols));
  }
};

/// A named trainable tensor. The gradient lives in `value.grad()`.
struct Param {
  std::string name;
  Tensor4 value;
};

}  // namespace aurk
