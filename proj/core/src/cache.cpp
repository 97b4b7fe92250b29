#include "aurk/cache.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"

namespace aurk {

namespace fs = std::filesystem;
using csv::content_lines;
using csv::format_double;
using csv::parse_double;
using csv::parse_int;
using csv::read_text_file;
using csv::split;
using csv::write_text_file;

namespace {

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex16(std::string_view s) {
  if (s.size() != 16) throw FormatError("cache entry version hash must be 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    int d = 0;
    if (c >= '0' && c <= '9')
      d = c - '0';
    else if (c >= 'a' && c <= 'f')
      d = c - 'a' + 10;
    else
      throw FormatError("cache entry version hash has a non-hex digit");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

}  // namespace

std::string_view to_string(BoxSide side) noexcept {
  switch (side) {
    case BoxSide::left:
      return "left";
    case BoxSide::right:
      return "right";
    case BoxSide::whole:
      break;
  }
  return "whole";
}

BoxSide parse_box_side(std::string_view text) {
  if (text == "whole") return BoxSide::whole;
  if (text == "left") return BoxSide::left;
  if (text == "right") return BoxSide::right;
  throw FormatError("unknown box side '" + std::string(text) + "'");
}

std::string encode_cache_entry(const MaskCacheEntry& entry) {
  std::string out = "aurk-boxes 1 " + hex16(entry.version_hash) + " " + std::to_string(entry.boxes.size()) + "\n";
  out += entry.frame_id + "\n";
  for (const AuBox& b : entry.boxes) {
    out += std::to_string(b.group_id) + "," + std::string(to_string(b.side)) + "," + format_double(b.y_min) + "," +
           format_double(b.x_min) + "," + format_double(b.y_max) + "," + format_double(b.x_max) + "\n";
  }
  return out;
}

MaskCacheEntry decode_cache_entry(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.size() < 2) throw FormatError("cache entry is truncated");
  std::istringstream header{std::string(lines[0])};
  std::string tag, version, hash;
  std::size_t count = 0;
  if (!(header >> tag >> version >> hash >> count) || tag != "aurk-boxes")
    throw FormatError("cache entry header is malformed");
  if (version != "1") throw VersionError("cache entry version " + version + " is not supported");
  MaskCacheEntry e;
  e.version_hash = parse_hex16(hash);
  e.frame_id = std::string(lines[1]);
  if (lines.size() != count + 2) throw FormatError("cache entry for '" + e.frame_id + "' is truncated");
  for (std::size_t i = 0; i < count; ++i) {
    const auto f = split(lines[i + 2]);
    if (f.size() != 6) throw FormatError("cache entry for '" + e.frame_id + "' has a malformed box row");
    AuBox b;
    b.group_id = parse_int(f[0], "group");
    b.side = parse_box_side(f[1]);
    b.y_min = parse_double(f[2], "y_min");
    b.x_min = parse_double(f[3], "x_min");
    b.y_max = parse_double(f[4], "y_max");
    b.x_max = parse_double(f[5], "x_max");
    e.boxes.push_back(b);
  }
  return e;
}

MaskCache::MaskCache(std::string dir, const PartitionTable& table, const RoiLayout& layout)
    : dir_(std::move(dir)), table_(&table), layout_(&layout) {
  const std::string v = hex16(layout.content_hash()) + hex16(table.content_hash());
  version_hash_ = fnv1a64(v);
}

MaskCache MaskCache::create(const std::string& dir, const PartitionTable& table, const RoiLayout& layout) {
  const fs::path marker = fs::path(dir) / kCacheMarkerFile;
  if (fs::exists(marker)) return open(dir, table, layout);
  fs::create_directories(fs::path(dir) / "entries");
  write_text_file(marker.string(), std::string(kCacheMarker) + "\n");
  return MaskCache(dir, table, layout);
}

MaskCache MaskCache::open(const std::string& dir, const PartitionTable& table, const RoiLayout& layout) {
  const fs::path marker = fs::path(dir) / kCacheMarkerFile;
  if (!fs::exists(marker))
    throw CacheMissError("no mask cache at '" + dir + "'; run `aurk partition` first or enable mean_box");
  const std::string text = read_text_file(marker.string());
  const auto lines = content_lines(text);
  if (lines.empty() || lines[0] != kCacheMarker)
    throw VersionError("mask cache at '" + dir + "' has an unsupported layout version; delete it and rerun `aurk partition`");
  return MaskCache(dir, table, layout);
}

std::string MaskCache::entry_path(const LandmarkRecord& record) const {
  const std::uint64_t key = fnv1a64(format_landmark_record(record), version_hash_);
  return (fs::path(dir_) / "entries" / (hex16(key) + ".boxes")).string();
}

std::optional<std::vector<AuBox>> MaskCache::lookup(const LandmarkRecord& record) const {
  const std::string path = entry_path(record);
  if (!fs::exists(path)) return std::nullopt;
  MaskCacheEntry e = decode_cache_entry(read_text_file(path));
  if (e.version_hash != version_hash_ || e.frame_id != record.frame_id ||
      e.boxes.size() != static_cast<std::size_t>(table_->box_count()))
    return std::nullopt;
  return std::move(e.boxes);
}

std::vector<AuBox> MaskCache::get_or_compute(const LandmarkRecord& record) {
  if (auto hit = lookup(record)) {
    ++stats_.hits;
    return std::move(*hit);
  }
  ++stats_.misses;
  std::vector<AuBox> boxes;
  try {
    boxes = face_boxes(record.landmarks, *table_, *layout_);
  } catch (const Error& e) {
    throw Error("frame '" + record.frame_id + "': " + e.what());
  }
  write_text_file(entry_path(record), encode_cache_entry({record.frame_id, version_hash_, boxes}));
  return boxes;
}

std::vector<AuBox> MaskCache::require(const LandmarkRecord& record) const {
  if (auto hit = lookup(record)) return std::move(*hit);
  throw CacheMissError("frame '" + record.frame_id + "' has no cached boxes in '" + dir_ +
                       "'; run `aurk partition` with this config first");
}

std::string format_box_table(std::span<const MaskCacheEntry> entries) {
  std::string out = "frame_id,slot,group,side,y_min,x_min,y_max,x_max\n";
  for (const auto& e : entries)
    for (std::size_t i = 0; i < e.boxes.size(); ++i) {
      const AuBox& b = e.boxes[i];
      out += e.frame_id + "," + std::to_string(i) + "," + std::to_string(b.group_id) + "," +
             std::string(to_string(b.side)) + "," + format_double(b.y_min) + "," + format_double(b.x_min) + "," +
             format_double(b.y_max) + "," + format_double(b.x_max) + "\n";
    }
  return out;
}

}  // namespace aurk
