#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/tensor.hpp"

namespace aurk {

/// 8-bit RGB image, interleaved rows.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image8() = default;
  Image8(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}

  std::uint8_t& at(int x, int y, int c) noexcept {
    return rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(c)];
  }
  std::uint8_t at(int x, int y, int c) const noexcept {
    return rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(c)];
  }
};

/// Binary PPM (P6, maxval 255).
std::string encode_ppm(const Image8& image);
Image8 decode_ppm(std::string_view bytes);
Image8 read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image8& image);

/// Bilinear resampling with pixel-centre alignment.
Image8 resize_bilinear(const Image8& image, int width, int height);

/// (1, 3, H, W) tensor of raw pixel values.
Tensor4 to_tensor(const Image8& image);

/// Dense 2-D field with `channels` planes, values stored channel-planar.
struct FlowField {
  int width = 0;
  int height = 0;
  int channels = 2;
  std::vector<double> values;

  double at(int c, int y, int x) const noexcept {
    return values[(static_cast<std::size_t>(c) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
                      static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

/// Text header `aurk-flow 1 <width> <height> <channels> int16 <scale>\n`
/// followed by little-endian int16 samples (value = sample * scale).
std::string encode_flow(const FlowField& flow, double scale);
FlowField decode_flow(std::string_view bytes);
FlowField read_flow(const std::string& path);
void write_flow(const std::string& path, const FlowField& flow, double scale);

/// Reads a whole binary file.
std::string read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::string_view bytes);

}  // namespace aurk
