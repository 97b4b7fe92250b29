#pragma once

#include <string_view>

// Data files from core/data, compiled into the library by CMake.
namespace aurk::detail {

std::string_view builtin_roi_layout();
/// Throws aurk::Error for an unknown dataset name.
std::string_view builtin_partition(std::string_view dataset);

}  // namespace aurk::detail
