#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/au_mask.hpp"
#include "aurk/landmarks.hpp"
#include "aurk/partition_table.hpp"
#include "aurk/roi_layout.hpp"

namespace aurk {

/// First line of `<cache>/aurk-cache.v1`.
inline constexpr std::string_view kCacheMarker = "aurk-mask-cache 1";
inline constexpr std::string_view kCacheMarkerFile = "aurk-cache.v1";

/// Per-frame boxes plus the partition version they were computed under.
struct MaskCacheEntry {
  std::string frame_id;
  std::uint64_t version_hash = 0;
  std::vector<AuBox> boxes;
};

std::string encode_cache_entry(const MaskCacheEntry& entry);
/// Throws FormatError on malformed text.
MaskCacheEntry decode_cache_entry(std::string_view text);

std::string_view to_string(BoxSide side) noexcept;
BoxSide parse_box_side(std::string_view text);

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
};

/// Content-addressed file cache of per-frame AU boxes. The key hashes the
/// landmark record together with the layout and partition-table hashes, so an
/// edited table lands on fresh keys and everything is recomputed.
class MaskCache {
 public:
  /// Creates the directory and marker when missing. Throws VersionError when
  /// an existing marker names another layout version.
  static MaskCache create(const std::string& dir, const PartitionTable& table,
                          const RoiLayout& layout = RoiLayout::builtin());
  /// Requires an existing cache. Throws CacheMissError otherwise.
  static MaskCache open(const std::string& dir, const PartitionTable& table,
                        const RoiLayout& layout = RoiLayout::builtin());

  std::uint64_t version_hash() const noexcept { return version_hash_; }
  std::string entry_path(const LandmarkRecord& record) const;

  /// Stored boxes when present and computed under the current version.
  std::optional<std::vector<AuBox>> lookup(const LandmarkRecord& record) const;
  /// Lookup, or compute with face_boxes and store. Updates the counters.
  std::vector<AuBox> get_or_compute(const LandmarkRecord& record);
  /// Lookup that throws CacheMissError naming `aurk partition` on a miss.
  std::vector<AuBox> require(const LandmarkRecord& record) const;

  const CacheStats& stats() const noexcept { return stats_; }
  const std::string& dir() const noexcept { return dir_; }

 private:
  MaskCache(std::string dir, const PartitionTable& table, const RoiLayout& layout);

  std::string dir_;
  const PartitionTable* table_;
  const RoiLayout* layout_;
  std::uint64_t version_hash_ = 0;
  CacheStats stats_;
};

/// `frame_id,slot,group,side,y_min,x_min,y_max,x_max` rows.
std::string format_box_table(std::span<const MaskCacheEntry> entries);

}  // namespace aurk
