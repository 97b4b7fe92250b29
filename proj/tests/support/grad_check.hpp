#pragma once

// Central-difference gradient oracle shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "aurk/tensor.hpp"

namespace aurk::testing {

inline constexpr double kFdEpsilon = 1e-3;

/// d f / d x by central differences, perturbing `x` in place.
inline std::vector<double> numeric_gradient(std::span<double> x, const std::function<double()>& f,
                                            double eps = kFdEpsilon) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f();
    x[i] = saved - eps;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

/// Central differences for the listed entries only.
inline std::vector<double> numeric_gradient_at(std::span<double> x, std::span<const std::size_t> indices,
                                               const std::function<double()>& f, double eps = kFdEpsilon) {
  std::vector<double> g;
  for (std::size_t i : indices) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f();
    x[i] = saved - eps;
    const double down = f();
    x[i] = saved;
    g.push_back((up - down) / (2.0 * eps));
  }
  return g;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

inline void fill_uniform(std::span<double> v, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  for (double& x : v) x = d(rng);
}

inline Tensor4 random_tensor(Shape4 s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor4 t(s);
  fill_uniform(t.values(), rng, lo, hi);
  return t;
}

/// Distinct values spaced well beyond the FD step so max selections never flip.
inline Tensor4 distinct_tensor(Shape4 s, std::mt19937_64& rng) {
  Tensor4 t(s);
  std::vector<double> vals(t.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.01 * static_cast<double>(i) - 0.5;
  std::shuffle(vals.begin(), vals.end(), rng);
  std::copy(vals.begin(), vals.end(), t.values().begin());
  return t;
}

/// sum(c * y), the scalar used to probe a vector-valued op.
inline double dot(std::span<const double> c, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * y[i];
  return s;
}

}  // namespace aurk::testing
