#include "aurk/labels.hpp"

#include <algorithm>
#include <cmath>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"

namespace aurk {

LabelMatrix::LabelMatrix(std::vector<int> row_group, int cols)
    : row_group_(std::move(row_group)), cols_(cols),
      bits_(row_group_.size() * static_cast<std::size_t>(cols), 0) {}

LabelMatrix make_label_matrix(const PartitionTable& table) {
  std::vector<int> groups;
  for (const BoxSlot& s : table.slots()) groups.push_back(s.group_id);
  return LabelMatrix(std::move(groups), table.au_count());
}

LabelMatrix assign_roi_labels(const ImageLabel& img, const PartitionTable& table, FetchMode mode) {
  if (img.size() != static_cast<std::size_t>(table.au_count()))
    throw ShapeError("image label has " + std::to_string(img.size()) + " AUs, table expects " +
                     std::to_string(table.au_count()));
  LabelMatrix m = make_label_matrix(table);
  const auto support = table.support_matrix(mode);
  const auto l = static_cast<std::size_t>(m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (img.bits[static_cast<std::size_t>(c)] && support[static_cast<std::size_t>(r) * l + static_cast<std::size_t>(c)])
        m.set(r, c);
  return m;
}

void apply_space_constraint(LabelMatrix& m, const PartitionTable& table, FetchMode mode) {
  if (m.rows() != table.box_count() || m.cols() != table.au_count())
    throw ShapeError("label matrix does not match the partition table");
  const auto support = table.support_matrix(mode);
  const auto l = static_cast<std::size_t>(m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (!support[static_cast<std::size_t>(r) * l + static_cast<std::size_t>(c)]) m.set(r, c, false);
}

bool satisfies_space_constraint(const LabelMatrix& m, const PartitionTable& table, FetchMode mode) {
  LabelMatrix copy = m;
  apply_space_constraint(copy, table, mode);
  return copy == m;
}

LabelMatrix binarize_logits(const Matrix& logits, const PartitionTable& table, FetchMode mode) {
  if (logits.rows != table.box_count() || logits.cols != table.au_count())
    throw ShapeError("logits are " + std::to_string(logits.rows) + "x" + std::to_string(logits.cols) +
                     ", table expects " + std::to_string(table.box_count()) + "x" +
                     std::to_string(table.au_count()));
  LabelMatrix m = make_label_matrix(table);
  for (int r = 0; r < logits.rows; ++r)
    for (int c = 0; c < logits.cols; ++c) {
      const double v = logits(r, c);
      if (std::isnan(v)) throw NumericError("NaN logit at row " + std::to_string(r));
      if (v > 0.0) m.set(r, c);
    }
  apply_space_constraint(m, table, mode);
  return m;
}

ImageLabel merge_roi_predictions(const LabelMatrix& m) {
  ImageLabel out(static_cast<std::size_t>(m.cols()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (m.get(r, c)) out.bits[static_cast<std::size_t>(c)] = 1;
  return out;
}

LabelFile parse_label_file(std::string_view text) {
  const auto lines = csv::content_lines(text);
  if (lines.empty()) throw FormatError("label file is empty");
  LabelFile file;
  const auto header = csv::split(lines.front());
  if (header.empty() || header.front() != "frame_id")
    throw FormatError("label file header must start with 'frame_id'");
  for (std::size_t i = 1; i < header.size(); ++i) {
    std::string_view name = header[i];
    if (name.rfind("au_", 0) == 0) name.remove_prefix(3);
    file.au_numbers.push_back(csv::parse_int(name, "AU column name"));
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = csv::split(lines[li]);
    const std::string frame_id(f.front());
    if (f.size() != header.size())
      throw FormatError("frame '" + frame_id + "': expected " + std::to_string(header.size() - 1) +
                        " AU columns, got " + std::to_string(f.size() - 1));
    ImageLabel label(file.au_numbers.size());
    for (std::size_t i = 1; i < f.size(); ++i) {
      const int v = csv::parse_int(f[i], "label");
      if (v != 0 && v != 1)
        throw FormatError("frame '" + frame_id + "': label values must be 0 or 1");
      label.bits[i - 1] = static_cast<std::uint8_t>(v);
    }
    file.records.push_back({frame_id, std::move(label)});
  }
  return file;
}

std::string format_label_file(const LabelFile& file) {
  std::string out = "frame_id";
  for (int au : file.au_numbers) out += ",au_" + std::to_string(au);
  out += '\n';
  for (const LabelRecord& r : file.records) {
    if (r.label.size() != file.au_numbers.size())
      throw ShapeError("frame '" + r.frame_id + "' label length differs from the header");
    out += r.frame_id;
    for (std::uint8_t b : r.label.bits) out += b ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

LabelFile read_label_file(const std::string& path) { return parse_label_file(csv::read_text_file(path)); }

void write_label_file(const std::string& path, const LabelFile& file) {
  csv::write_text_file(path, format_label_file(file));
}

void check_label_columns(const LabelFile& file, const PartitionTable& table) {
  const auto expected = table.au_numbers();
  if (!std::equal(file.au_numbers.begin(), file.au_numbers.end(), expected.begin(), expected.end()))
    throw FormatError("label file AU columns do not match the '" + table.dataset() + "' partition table");
}

}  // namespace aurk
