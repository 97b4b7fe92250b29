#include "aurk/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <unordered_map>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"
#include "aurk/metrics.hpp"

namespace aurk {

namespace fs = std::filesystem;

Split parse_split(std::string_view text) {
  if (text == "all") return Split::all;
  if (text == "train") return Split::train;
  if (text == "holdout") return Split::holdout;
  throw Error("unknown split '" + std::string(text) + "' (all | train | holdout)");
}

namespace {

bool is_holdout(const std::string& subject, std::span<const std::string> holdout) {
  return std::find(holdout.begin(), holdout.end(), subject) != holdout.end();
}

bool in_split(const std::string& subject, Split split, std::span<const std::string> holdout) {
  switch (split) {
    case Split::train:
      return !is_holdout(subject, holdout);
    case Split::holdout:
      return is_holdout(subject, holdout);
    case Split::all:
      break;
  }
  return true;
}

}  // namespace

std::vector<std::size_t> split_indices(const Dataset& data, Split split,
                                       std::span<const std::string> holdout_subjects) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.frames.size(); ++i)
    if (in_split(data.frames[i].subject, split, holdout_subjects)) out.push_back(i);
  return out;
}

std::vector<LandmarkRecord> read_dataset_landmarks(const RunConfig& config) {
  const std::string path = (fs::path(config.resolve(config.data_dir)) / "landmarks.csv").string();
  auto records = read_landmark_file(path);
  if (records.empty()) throw EmptyDatasetError("landmark file '" + path + "' has no frames");
  return records;
}

std::vector<AuBox> training_mean_boxes(const RunConfig& config, std::span<const LandmarkRecord> records,
                                       const MaskCache& cache) {
  MeanBoxAccumulator acc;
  for (const LandmarkRecord& r : records)
    if (in_split(subject_of(r.frame_id), Split::train, config.holdout_subjects)) acc.add(cache.require(r));
  if (acc.frames() == 0) throw EmptyDatasetError("mean-box mode needs at least one training frame");
  return acc.mean();
}

BoxLookup make_box_lookup(const RunConfig& config, const PartitionTable& table,
                          std::span<const LandmarkRecord> records) {
  auto cache = std::make_shared<MaskCache>(MaskCache::open(config.resolve(config.cache_dir), table));
  if (config.mean_box) {
    auto mean = std::make_shared<std::vector<AuBox>>(training_mean_boxes(config, records, *cache));
    return [mean](const LandmarkRecord&) { return *mean; };
  }
  return [cache](const LandmarkRecord& r) { return cache->require(r); };
}

AuBox rescale_box(const AuBox& box, double sx, double sy) {
  AuBox b = box;
  b.y_min *= sy;
  b.y_max *= sy;
  b.x_min *= sx;
  b.x_max *= sx;
  return b;
}

namespace {

FlowField resize_flow(const FlowField& f, int size) {
  if (f.width == size && f.height == size) return f;
  FlowField out;
  out.width = out.height = size;
  out.channels = f.channels;
  out.values.assign(static_cast<std::size_t>(size) * size * static_cast<std::size_t>(f.channels), 0.0);
  for (int c = 0; c < f.channels; ++c)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const int sx = std::min(f.width - 1, x * f.width / size);
        const int sy = std::min(f.height - 1, y * f.height / size);
        out.values[(static_cast<std::size_t>(c) * size + y) * size + x] = f.at(c, sy, sx);
      }
  return out;
}

}  // namespace

Dataset load_dataset(const RunConfig& config, const PartitionTable& table, const BoxLookup& boxes,
                     const LoadOptions& options) {
  const fs::path data_dir = config.resolve(config.data_dir);
  const auto records = read_dataset_landmarks(config);
  Dataset data;
  data.resolution = config.resolution;
  data.au_numbers.assign(table.au_numbers().begin(), table.au_numbers().end());

  std::unordered_map<std::string, ImageLabel> labels;
  const fs::path label_path = data_dir / "labels.csv";
  if (options.labels || fs::exists(label_path)) {
    const LabelFile file = read_label_file(label_path.string());
    check_label_columns(file, table);
    for (const auto& r : file.records) labels.emplace(r.frame_id, r.label);
    data.has_labels = true;
  }

  std::map<std::string, int> next_index;
  const double res = config.resolution;
  for (const LandmarkRecord& r : records) {
    Frame f;
    f.id = r.frame_id;
    f.subject = subject_of(r.frame_id);
    f.index_in_subject = next_index[f.subject]++;
    if (data.has_labels) {
      const auto it = labels.find(r.frame_id);
      if (it == labels.end()) throw ShapeError("frame '" + r.frame_id + "' has no row in labels.csv");
      f.label = it->second;
    } else {
      f.label = ImageLabel(static_cast<std::size_t>(table.au_count()));
    }
    const double sx = res / r.landmarks.image_width;
    const double sy = res / r.landmarks.image_height;
    for (const AuBox& b : boxes(r)) f.boxes.push_back(rescale_box(b, sx, sy));
    if (options.images) {
      Image8 img = read_ppm((data_dir / "images" / (r.frame_id + ".ppm")).string());
      if (img.width != config.resolution || img.height != config.resolution)
        img = resize_bilinear(img, config.resolution, config.resolution);
      f.image = std::move(img);
    }
    if (options.flow)
      f.flow = resize_flow(read_flow((data_dir / "flow" / (r.frame_id + ".flow")).string()), config.resolution);
    data.frames.push_back(std::move(f));
  }
  return data;
}

Tensor4 flow_stack(const Dataset& data, std::size_t index, int flow_frames) {
  const Frame& centre = data.frames.at(index);
  const int first = static_cast<int>(index) - centre.index_in_subject;
  int last = first;
  while (static_cast<std::size_t>(last + 1) < data.frames.size() &&
         data.frames[static_cast<std::size_t>(last + 1)].subject == centre.subject)
    ++last;
  const int size = data.resolution;
  Tensor4 out({1, 2 * flow_frames, size, size});
  for (int k = 0; k < flow_frames; ++k) {
    const int j = std::clamp(static_cast<int>(index) + k - flow_frames / 2, first, last);
    const FlowField& f = data.frames[static_cast<std::size_t>(j)].flow;
    if (f.channels != 2 || f.width != size || f.height != size)
      throw ShapeError("frame '" + data.frames[static_cast<std::size_t>(j)].id +
                       "' needs a 2-channel flow field at the working resolution");
    for (int c = 0; c < 2; ++c)
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) out.at(0, 2 * k + c, y, x) = f.at(c, y, x);
  }
  return out;
}

}  // namespace aurk
