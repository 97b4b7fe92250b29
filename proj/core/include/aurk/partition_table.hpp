#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aurk {

/// One AU group: a facial region (union of basic RoIs) and the AUs it carries.
struct AuGroup {
  int group_id = 0;
  bool symmetric = false;  // split into a left and a right box
  std::vector<int> aus;    // AU numbers owned by this group
  std::vector<int> rois;   // basic RoI numbers 1..43
  std::vector<int> fetch_from;
};

enum class BoxSide { whole, left, right };

/// One row of the per-image box list.
struct BoxSlot {
  int group_id = 0;
  BoxSide side = BoxSide::whole;
};

/// How fetch edges combine into a group's label support.
///   direct      own AUs plus the own AUs of every group listed in `fetch`
///   transitive  own AUs plus everything reachable through `fetch` chains
enum class FetchMode { direct, transitive };

/// Static AU partition rule loaded from `partition.<dataset>.v1`.
class PartitionTable {
 public:
  static PartitionTable parse(std::string_view text);
  static PartitionTable load(const std::string& path);
  /// Compiled-in tables: "bp4d", "disfa", "synthetic".
  static const PartitionTable& builtin(std::string_view dataset);

  const std::string& dataset() const noexcept { return dataset_; }
  int version() const noexcept { return version_; }
  std::uint64_t content_hash() const noexcept { return hash_; }

  std::span<const AuGroup> groups() const noexcept { return groups_; }
  /// Throws MissingRegionError for an unknown id.
  const AuGroup& group(int group_id) const;

  /// AU numbers in label-column order (ascending). size() == L.
  std::span<const int> au_numbers() const noexcept { return au_numbers_; }
  int au_count() const noexcept { return static_cast<int>(au_numbers_.size()); }
  /// Column of an AU number, or -1.
  int au_column(int au) const noexcept;

  /// Box rows in order: groups ascending, symmetric groups as left then right.
  std::span<const BoxSlot> slots() const noexcept { return slots_; }
  int box_count() const noexcept { return static_cast<int>(slots_.size()); }

  /// Label columns a group's RoIs may carry, ascending.
  std::vector<int> support_columns(int group_id, FetchMode mode = FetchMode::direct) const;
  /// Bitmask form of `support_columns` for every slot: row-major R x L of 0/1.
  std::vector<std::uint8_t> support_matrix(FetchMode mode = FetchMode::direct) const;

 private:
  int version_ = 0;
  std::uint64_t hash_ = 0;
  std::string dataset_;
  std::vector<AuGroup> groups_;
  std::vector<int> au_numbers_;
  std::vector<BoxSlot> slots_;
};

}  // namespace aurk
