#pragma once

// Finite-difference suites over random small instances. Each returns the
// worst relative error seen across all inputs and parameters.

#include <cstdint>
#include <string>
#include <vector>

namespace aurk::testing {

struct SuiteResult {
  std::string op;
  int instances = 0;
  double worst = 0.0;
};

SuiteResult conv2d_grad_suite(int instances, std::uint64_t seed);
SuiteResult linear_grad_suite(int instances, std::uint64_t seed);
SuiteResult roi_pool_grad_suite(int instances, std::uint64_t seed);
SuiteResult loss_grad_suite(int instances, std::uint64_t seed);
SuiteResult convlstm_cell_grad_suite(int instances, std::uint64_t seed);
SuiteResult two_stream_fuse_grad_suite(int instances, std::uint64_t seed);

std::vector<SuiteResult> all_grad_suites(int instances, std::uint64_t seed);

}  // namespace aurk::testing
