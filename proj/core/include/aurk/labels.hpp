#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/partition_table.hpp"
#include "aurk/tensor.hpp"

namespace aurk {

/// Image-level AU occurrence vector, one bit per label column.
struct ImageLabel {
  std::vector<std::uint8_t> bits;

  ImageLabel() = default;
  explicit ImageLabel(std::size_t l) : bits(l, 0) {}
  explicit ImageLabel(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

  std::size_t size() const noexcept { return bits.size(); }
  friend bool operator==(const ImageLabel&, const ImageLabel&) = default;
};

/// RoI-level labels: one row per box slot, one column per AU.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::vector<int> row_group, int cols);

  int rows() const noexcept { return static_cast<int>(row_group_.size()); }
  int cols() const noexcept { return cols_; }
  int row_group(int r) const { return row_group_.at(static_cast<std::size_t>(r)); }

  bool get(int r, int c) const { return bits_[index(r, c)] != 0; }
  void set(int r, int c, bool on = true) { bits_[index(r, c)] = on ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  std::vector<int> row_group_;
  int cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Empty matrix shaped for the table (R rows, L columns).
LabelMatrix make_label_matrix(const PartitionTable& table);

/// Spreads an image label over the box rows: a row keeps AU j only when j is
/// in its group's support. Throws ShapeError when the length is not L.
LabelMatrix assign_roi_labels(const ImageLabel& img, const PartitionTable& table,
                              FetchMode mode = FetchMode::direct);

/// Clears every bit outside the rows' group support.
void apply_space_constraint(LabelMatrix& m, const PartitionTable& table,
                            FetchMode mode = FetchMode::direct);
bool satisfies_space_constraint(const LabelMatrix& m, const PartitionTable& table,
                                FetchMode mode = FetchMode::direct);

/// Bit = logit > 0, then the space constraint. `logits` is R x L.
/// Throws NumericError on NaN and ShapeError on a size mismatch.
LabelMatrix binarize_logits(const Matrix& logits, const PartitionTable& table,
                            FetchMode mode = FetchMode::direct);

/// Column-wise OR over rows.
ImageLabel merge_roi_predictions(const LabelMatrix& m);

/// Rows of a label file: `frame_id,<bit>...` under a header naming AU numbers.
struct LabelRecord {
  std::string frame_id;
  ImageLabel label;
};

struct LabelFile {
  std::vector<int> au_numbers;
  std::vector<LabelRecord> records;
};

/// Header `frame_id,au_1,au_2,...` (column names are `au_<number>`).
LabelFile parse_label_file(std::string_view text);
std::string format_label_file(const LabelFile& file);
LabelFile read_label_file(const std::string& path);
void write_label_file(const std::string& path, const LabelFile& file);

/// Throws FormatError unless the file's AU columns are exactly the table's.
void check_label_columns(const LabelFile& file, const PartitionTable& table);

}  // namespace aurk
