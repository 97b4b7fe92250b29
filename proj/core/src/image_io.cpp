#include "aurk/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"

namespace aurk {

std::string read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary_file(const std::string& path, std::string_view bytes) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string encode_ppm(const Image8& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

namespace {

// Next whitespace-separated header token, skipping `#` comments.
std::string_view next_token(std::string_view bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

}  // namespace

Image8 decode_ppm(std::string_view bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw FormatError("not a binary PPM (P6) image");
  const int w = csv::parse_int(next_token(bytes, pos), "PPM width");
  const int h = csv::parse_int(next_token(bytes, pos), "PPM height");
  const int maxval = csv::parse_int(next_token(bytes, pos), "PPM maxval");
  if (w < 1 || h < 1) throw FormatError("PPM size must be positive");
  if (maxval != 255) throw FormatError("only 8-bit PPM images are supported");
  ++pos;  // single whitespace byte before the raster
  Image8 img(w, h);
  if (bytes.size() < pos + img.rgb.size()) throw FormatError("PPM raster is truncated");
  std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos), img.rgb.size(), img.rgb.begin());
  return img;
}

Image8 read_ppm(const std::string& path) {
  try {
    return decode_ppm(read_binary_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_ppm(const std::string& path, const Image8& image) { write_binary_file(path, encode_ppm(image)); }

Image8 resize_bilinear(const Image8& image, int width, int height) {
  if (width < 1 || height < 1) throw ShapeError("resize target must be positive");
  if (width == image.width && height == image.height) return image;
  Image8 out(width, height);
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double tx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = image.at(x0, y0, c) * (1 - tx) + image.at(x1, y0, c) * tx;
        const double bot = image.at(x0, y1, c) * (1 - tx) + image.at(x1, y1, c) * tx;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(top * (1 - ty) + bot * ty, 0.0, 255.0)));
      }
    }
  }
  return out;
}

Tensor4 to_tensor(const Image8& image) {
  Tensor4 t({1, 3, image.height, image.width});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) t.at(0, c, y, x) = image.at(x, y, c);
  return t;
}

std::string encode_flow(const FlowField& flow, double scale) {
  if (!(scale > 0.0)) throw FormatError("flow scale must be positive");
  const std::size_t count = static_cast<std::size_t>(flow.width) * static_cast<std::size_t>(flow.height) *
                            static_cast<std::size_t>(flow.channels);
  if (flow.values.size() != count) throw ShapeError("flow values do not match its dimensions");
  std::string out = "aurk-flow 1 " + std::to_string(flow.width) + " " + std::to_string(flow.height) + " " +
                    std::to_string(flow.channels) + " int16 " + csv::format_double(scale) + "\n";
  for (double v : flow.values) {
    const auto q = static_cast<std::int16_t>(std::clamp<long>(std::lround(v / scale), -32768, 32767));
    const auto u = static_cast<std::uint16_t>(q);
    out.push_back(static_cast<char>(u & 0xff));
    out.push_back(static_cast<char>(u >> 8));
  }
  return out;
}

FlowField decode_flow(std::string_view bytes) {
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw FormatError("flow file has no header line");
  const auto f = csv::split(bytes.substr(0, nl), ' ');
  if (f.size() != 7 || f[0] != "aurk-flow") throw FormatError("flow header must be 'aurk-flow 1 W H C int16 scale'");
  if (csv::parse_int(f[1], "flow version") != 1) throw VersionError("flow format version " + std::string(f[1]));
  if (f[5] != "int16") throw FormatError("unsupported flow dtype '" + std::string(f[5]) + "'");
  FlowField flow;
  flow.width = csv::parse_int(f[2], "flow width");
  flow.height = csv::parse_int(f[3], "flow height");
  flow.channels = csv::parse_int(f[4], "flow channels");
  const double scale = csv::parse_double(f[6], "flow scale");
  if (flow.width < 1 || flow.height < 1 || flow.channels < 1 || !(scale > 0.0))
    throw FormatError("flow header values out of range");
  const std::size_t count = static_cast<std::size_t>(flow.width) * static_cast<std::size_t>(flow.height) *
                            static_cast<std::size_t>(flow.channels);
  if (bytes.size() - nl - 1 != 2 * count) throw FormatError("flow payload size does not match its header");
  flow.values.resize(count);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + nl + 1);
  for (std::size_t i = 0; i < count; ++i) {
    const auto u = static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
    flow.values[i] = static_cast<std::int16_t>(u) * scale;
  }
  return flow;
}

FlowField read_flow(const std::string& path) {
  try {
    return decode_flow(read_binary_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_flow(const std::string& path, const FlowField& flow, double scale) {
  write_binary_file(path, encode_flow(flow, scale));
}

}  // namespace aurk
