#include "aurk/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"
#include "aurk/image_io.hpp"
#include "aurk/loss.hpp"
#include "aurk/preprocess.hpp"

namespace aurk {

namespace {

// Separates the data-order stream from the weight-init stream.
constexpr std::uint64_t kShuffleStream = 0x5eed5eed5eed5eedULL;

int frames_per_unit(const RunConfig& config) {
  return config.dynamic == DynamicMode::convlstm ? config.timeline.time_steps : 1;
}

void mirror_columns(Tensor4& t) {
  const int w = t.w();
  for (int c = 0; c < t.c(); ++c)
    for (int y = 0; y < t.h(); ++y)
      for (int x = 0; x < w / 2; ++x) std::swap(t.at(0, c, y, x), t.at(0, c, y, w - 1 - x));
}

}  // namespace

std::vector<Unit> make_units(const Dataset& data, std::span<const std::size_t> frames, const RunConfig& config,
                             int window_stride) {
  std::vector<Unit> units;
  if (config.dynamic != DynamicMode::convlstm) {
    for (std::size_t f : frames) units.push_back({{f}});
    return units;
  }
  // Runs of consecutive frames of one subject.
  std::vector<std::vector<std::size_t>> runs;
  for (std::size_t f : frames) {
    if (runs.empty() || data.frames[runs.back().back()].subject != data.frames[f].subject ||
        runs.back().back() + 1 != f)
      runs.emplace_back();
    runs.back().push_back(f);
  }
  const TimelineSpec& spec = config.timeline;
  for (const auto& run : runs) {
    if (config.pad_start) {
      // Window ends at 0, step, 2 * step, ...; indices before the run clamp to its first frame.
      const int step = window_stride == 0 ? spec.time_steps * spec.stride() : window_stride;
      for (int end = 0; end < static_cast<int>(run.size()); end += step) {
        Unit u;
        for (int t = 0; t < spec.time_steps; ++t) {
          const int f = std::max(0, end - (spec.time_steps - 1 - t) * spec.stride());
          u.frames.push_back(run[static_cast<std::size_t>(f)]);
        }
        units.push_back(std::move(u));
      }
      continue;
    }
    if (static_cast<int>(run.size()) < spec.span()) continue;
    for (int s : window_starts(static_cast<int>(run.size()), spec, window_stride)) {
      Unit u;
      for (int t = 0; t < spec.time_steps; ++t) u.frames.push_back(run[static_cast<std::size_t>(s + t * spec.stride())]);
      units.push_back(std::move(u));
    }
  }
  if (units.empty())
    throw InsufficientFramesError("no subject has the " + std::to_string(spec.span()) +
                                  " consecutive frames a ConvLSTM window needs");
  return units;
}

Batch assemble_batch(const Dataset& data, const RunConfig& config, std::span<const Unit> units,
                     std::span<const std::uint8_t> mirror) {
  if (mirror.size() != units.size()) throw ShapeError("one mirror flag per unit expected");
  const int per_unit = frames_per_unit(config);
  const int frames = static_cast<int>(units.size()) * per_unit;
  const int size = data.resolution;
  const bool two_stream = config.dynamic == DynamicMode::two_stream;
  Batch batch;
  batch.images = Tensor4({frames, 3, size, size});
  if (two_stream) batch.flow = Tensor4({frames, 2 * config.flow_frames, size, size});
  batch.windows = config.dynamic == DynamicMode::convlstm ? static_cast<int>(units.size()) : 0;
  batch.time_steps = per_unit;
  const std::size_t plane = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  int n = 0;
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (static_cast<int>(units[u].frames.size()) != per_unit) throw ShapeError("unit has the wrong frame count");
    for (std::size_t f : units[u].frames) {
      const Frame& frame = data.frames.at(f);
      if (frame.image.width != size || frame.image.height != size)
        throw ShapeError("frame '" + frame.id + "' has no image at the working resolution");
      const Preprocessed p = preprocess(to_tensor(frame.image), frame.boxes, mirror[u] != 0, config.mean_pixel);
      auto dst = batch.images.values().subspan(static_cast<std::size_t>(n) * 3 * plane, 3 * plane);
      const auto src = p.image.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] * config.input_scale;
      batch.boxes.insert(batch.boxes.end(), p.boxes.begin(), p.boxes.end());
      if (two_stream) {
        Tensor4 stack = flow_stack(data, f, config.flow_frames);
        if (mirror[u]) mirror_columns(stack);
        const std::size_t len = stack.size();
        std::copy(stack.values().begin(), stack.values().end(),
                  batch.flow.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(n) * len));
      }
      ++n;
    }
  }
  return batch;
}

std::vector<std::uint8_t> batch_targets(const Dataset& data, const PartitionTable& table,
                                        std::span<const Unit> units) {
  std::vector<std::uint8_t> out;
  for (const Unit& u : units)
    for (std::size_t f : u.frames) {
      const LabelMatrix m = assign_roi_labels(data.frames.at(f).label, table);
      out.insert(out.end(), m.bits().begin(), m.bits().end());
    }
  return out;
}

TrainOutcome train_model(const RunConfig& config, const PartitionTable& table, const Dataset& data,
                         std::span<const std::size_t> frames, std::ostream* progress,
                         std::span<const Param> backbone_init) {
  if (frames.empty()) throw EmptyDatasetError("no training frames");
  if (!data.has_labels) throw EmptyDatasetError("training needs labels.csv");
  TrainOutcome out{AuRcnn(config.model_config(table.au_count(), table.box_count())), {}, {}};
  out.model.init(config.seed);
  const auto params = out.model.params();
  for (const Param& src : backbone_init) {
    if (!src.name.starts_with("rgb.")) continue;
    const auto dst = std::find_if(params.begin(), params.end(), [&](const Param* p) { return p->name == src.name; });
    if (dst == params.end() || (*dst)->value.shape() != src.value.shape())
      throw VersionError("backbone weight '" + src.name + "' does not fit backbone " + config.backbone);
    (*dst)->value = src.value;
  }
  out.optim = make_optim_state(std::vector<const Param*>(params.begin(), params.end()), config.optim);

  const std::vector<Unit> units = make_units(data, frames, config, config.train_window_stride);
  std::mt19937_64 rng(config.seed ^ kShuffleStream);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> order(units.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    begin_epoch(out.optim, epoch);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    int epoch_steps = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config.batch)) {
      const std::size_t end = std::min(order.size(), b + static_cast<std::size_t>(config.batch));
      std::vector<Unit> chunk;
      std::vector<std::uint8_t> mirror;
      for (std::size_t k = b; k < end; ++k) {
        chunk.push_back(units[order[k]]);
        mirror.push_back(config.mirror && coin(rng) ? 1 : 0);
      }
      const Batch batch = assemble_batch(data, config, chunk, mirror);
      const std::vector<std::uint8_t> targets = batch_targets(data, table, chunk);
      AuRcnn::Trace trace;
      const Matrix logits = out.model.forward(batch, &trace);
      const LossResult loss = sigmoid_ce_loss(logits, targets);
      if (!std::isfinite(loss.loss)) throw NumericError("training loss diverged at epoch " + std::to_string(epoch));
      out.model.zero_grad();
      out.model.backward(trace, loss.grad);
      sgd_momentum_step(params, out.optim);
      out.log.iteration_epoch.push_back(epoch);
      out.log.iteration_loss.push_back(loss.loss);
      epoch_total += loss.loss;
      ++epoch_steps;
    }
    out.log.epoch_lr.push_back(out.optim.lr);
    out.log.epoch_mean_loss.push_back(epoch_total / std::max(epoch_steps, 1));
    if (progress)
      *progress << "epoch " << epoch + 1 << "/" << config.epochs << " lr " << out.optim.lr << " loss "
                << out.log.epoch_mean_loss.back() << "\n";
  }
  return out;
}

std::vector<Matrix> infer_logits(const AuRcnn& model, const RunConfig& config, const Dataset& data,
                                 std::span<const std::size_t> frames) {
  const int r = model.config().boxes;
  const int l = model.config().labels;
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < frames.size(); ++i) slot.emplace(frames[i], i);
  std::vector<Matrix> out(frames.size(), Matrix(r, l));
  std::vector<int> best_step(frames.size(), -1);
  const std::vector<Unit> units = make_units(data, frames, config, config.window_stride);
  for (std::size_t b = 0; b < units.size(); b += static_cast<std::size_t>(config.batch)) {
    const std::size_t end = std::min(units.size(), b + static_cast<std::size_t>(config.batch));
    const std::span<const Unit> chunk(units.data() + b, end - b);
    const std::vector<std::uint8_t> no_mirror(chunk.size(), 0);
    const Matrix logits = model.forward(assemble_batch(data, config, chunk, no_mirror), nullptr);
    int n = 0;
    for (const Unit& u : chunk)
      for (std::size_t t = 0; t < u.frames.size(); ++t, ++n) {
        const std::size_t i = slot.at(u.frames[t]);
        // Keep the window that sees the frame at its latest time step.
        if (static_cast<int>(t) <= best_step[i]) continue;
        best_step[i] = static_cast<int>(t);
        for (int row = 0; row < r; ++row) {
          const auto src = logits.row(n * r + row);
          std::copy(src.begin(), src.end(), out[i].row(row).begin());
        }
      }
  }
  return out;
}

std::vector<ImageLabel> predict_labels(const AuRcnn& model, const RunConfig& config, const PartitionTable& table,
                                       const Dataset& data, std::span<const std::size_t> frames) {
  std::vector<ImageLabel> out;
  for (const Matrix& m : infer_logits(model, config, data, frames))
    out.push_back(merge_roi_predictions(binarize_logits(m, table)));
  return out;
}

std::string format_loss_csv(const TrainLog& log) {
  std::string out = "iteration,epoch,loss\n";
  for (std::size_t i = 0; i < log.iteration_loss.size(); ++i)
    out += std::to_string(i + 1) + "," + std::to_string(log.iteration_epoch[i] + 1) + "," +
           csv::format_double(log.iteration_loss[i]) + "\n";
  return out;
}

std::string format_epoch_loss_csv(const TrainLog& log) {
  std::string out = "epoch,lr,mean_loss\n";
  for (std::size_t i = 0; i < log.epoch_mean_loss.size(); ++i)
    out += std::to_string(i + 1) + "," + csv::format_double(log.epoch_lr[i]) + "," +
           csv::format_double(log.epoch_mean_loss[i]) + "\n";
  return out;
}

}  // namespace aurk
