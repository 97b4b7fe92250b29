#include <benchmark/benchmark.h>

#include <random>

#include "aurk/au_mask.hpp"
#include "aurk/face_model.hpp"
#include "aurk/layers.hpp"
#include "aurk/partition_table.hpp"

namespace {

aurk::Tensor4 random_tensor(aurk::Shape4 shape, std::uint64_t seed) {
  aurk::Tensor4 t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : t.values()) v = u(rng);
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const aurk::Tensor4 x = random_tensor({1, 16, size, size}, 1);
  const aurk::Tensor4 w = random_tensor({32, 16, 3, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aurk::conv2d(x, w, nullptr, 1, 1));
  state.SetItemsProcessed(state.iterations() * size * size * 32 * 16 * 9);
}
BENCHMARK(BM_Conv2dForward)->Arg(16)->Arg(32);

void BM_Conv2dBackward(benchmark::State& state) {
  const aurk::Tensor4 x = random_tensor({1, 16, 32, 32}, 1);
  aurk::Tensor4 w = random_tensor({32, 16, 3, 3}, 2);
  const aurk::Tensor4 dy = random_tensor({1, 32, 32, 32}, 3);
  for (auto _ : state) {
    w.zero_grad();
    benchmark::DoNotOptimize(aurk::conv2d_backward(x, w, nullptr, 1, 1, dy));
  }
}
BENCHMARK(BM_Conv2dBackward);

void BM_RoiPool(benchmark::State& state) {
  const aurk::Tensor4 f = random_tensor({2, 32, 32, 32}, 4);
  aurk::RoiSpec spec;
  spec.out_h = spec.out_w = 7;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 16.0);
  for (int i = 0; i < 18; ++i) {
    const double y = u(rng), x = u(rng);
    spec.boxes.push_back({i % 2, y, x, y + 1.0 + u(rng), x + 1.0 + u(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(aurk::roi_pool(f, spec));
  state.SetItemsProcessed(state.iterations() * 18);
}
BENCHMARK(BM_RoiPool);

void BM_FaceBoxes(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(6);
  const aurk::Landmarks68 lm = aurk::random_face(rng, size, size);
  const auto& table = aurk::PartitionTable::builtin("bp4d");
  for (auto _ : state) benchmark::DoNotOptimize(aurk::face_boxes(lm, table));
}
BENCHMARK(BM_FaceBoxes)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
