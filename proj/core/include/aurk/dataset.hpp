#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/au_mask.hpp"
#include "aurk/cache.hpp"
#include "aurk/config.hpp"
#include "aurk/image_io.hpp"
#include "aurk/labels.hpp"
#include "aurk/landmarks.hpp"
#include "aurk/partition_table.hpp"

namespace aurk {

/// One video frame at the working resolution.
struct Frame {
  std::string id;
  std::string subject;
  int index_in_subject = 0;  // position within the subject's run of frames
  ImageLabel label;
  std::vector<AuBox> boxes;  // R image-space boxes, slot order
  Image8 image;              // empty unless images were loaded
  FlowField flow;            // empty unless flow was loaded
};

struct Dataset {
  std::vector<int> au_numbers;
  int resolution = 0;
  bool has_labels = false;
  std::vector<Frame> frames;  // landmark-file order
};

enum class Split { all, train, holdout };
Split parse_split(std::string_view text);
std::vector<std::size_t> split_indices(const Dataset& data, Split split,
                                       std::span<const std::string> holdout_subjects);

/// Boxes for one landmark record, in the record's own pixel space.
using BoxLookup = std::function<std::vector<AuBox>(const LandmarkRecord&)>;

/// Per-frame boxes from the mask cache, or, in mean-box mode, the mean of the
/// training split's cached boxes handed to every frame. The lookup owns the
/// cache handle.
BoxLookup make_box_lookup(const RunConfig& config, const PartitionTable& table,
                          std::span<const LandmarkRecord> records);

/// Mean of the cached boxes over the training split (mean-box mode source).
std::vector<AuBox> training_mean_boxes(const RunConfig& config, std::span<const LandmarkRecord> records,
                                       const MaskCache& cache);

struct LoadOptions {
  bool images = true;
  bool flow = false;
  bool labels = true;  // when false a missing labels.csv is allowed
};

/// Reads `<data_dir>/landmarks.csv`, `labels.csv`, `images/<id>.ppm` and
/// `flow/<id>.flow`, scaling images and boxes to `config.resolution`.
Dataset load_dataset(const RunConfig& config, const PartitionTable& table, const BoxLookup& boxes,
                     const LoadOptions& options);

std::vector<LandmarkRecord> read_dataset_landmarks(const RunConfig& config);

/// Box scaled from a (src_w x src_h) image to (dst_w x dst_h).
AuBox rescale_box(const AuBox& box, double sx, double sy);

/// The `flow_frames` flow fields centred on frame `index` (offsets
/// -flow_frames/2 .. flow_frames/2 - 1, clamped to the subject) stacked
/// along channels into a (1, 2 * flow_frames, H, W) tensor.
Tensor4 flow_stack(const Dataset& data, std::size_t index, int flow_frames);

}  // namespace aurk
