#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "aurk/config.hpp"
#include "aurk/dataset.hpp"
#include "aurk/labels.hpp"
#include "aurk/model.hpp"
#include "aurk/optim.hpp"
#include "aurk/partition_table.hpp"

namespace aurk {

/// One training or inference item: a single frame, or the T frames of a
/// ConvLSTM window in time order. Values index Dataset::frames.
struct Unit {
  std::vector<std::size_t> frames;
};

/// Static mode: one unit per frame. ConvLSTM: windows `stride` apart inside
/// each subject, frames `skip + 1` apart. With config.pad_start the windows end
/// at frames 0, stride, 2 * stride, ... and indices before the subject clamp to
/// its first frame. Without it, subjects shorter than a window are skipped;
/// InsufficientFramesError if nothing is left.
std::vector<Unit> make_units(const Dataset& data, std::span<const std::size_t> frames, const RunConfig& config,
                             int window_stride);

/// Preprocessed model input for `units`, each mirrored when flagged.
Batch assemble_batch(const Dataset& data, const RunConfig& config, std::span<const Unit> units,
                     std::span<const std::uint8_t> mirror);

/// Row targets (F * R rows, L columns, frame-major) for the batch frames.
std::vector<std::uint8_t> batch_targets(const Dataset& data, const PartitionTable& table,
                                        std::span<const Unit> units);

struct TrainLog {
  std::vector<int> iteration_epoch;
  std::vector<double> iteration_loss;
  std::vector<double> epoch_lr;
  std::vector<double> epoch_mean_loss;
};

struct TrainOutcome {
  AuRcnn model;
  OptimState optim;
  TrainLog log;
};

/// Momentum SGD over `frames` for config.epochs epochs. Shuffling and
/// mirroring draw from an rng seeded by config.seed; so does init. epochs = 0
/// returns the initialised model. `backbone_init` entries named rgb.* replace
/// the random backbone weights; their shapes must match (VersionError).
TrainOutcome train_model(const RunConfig& config, const PartitionTable& table, const Dataset& data,
                         std::span<const std::size_t> frames, std::ostream* progress = nullptr,
                         std::span<const Param> backbone_init = {});

/// Per-frame logits (R rows each) for `frames`. A ConvLSTM frame takes its
/// logits from the window that holds it at the latest time step, which is the
/// window's last step wherever such a window exists. Uncovered frames stay 0.
std::vector<Matrix> infer_logits(const AuRcnn& model, const RunConfig& config, const Dataset& data,
                                 std::span<const std::size_t> frames);

/// RoI logits binarized at 0 within each row's group support, then OR-merged.
std::vector<ImageLabel> predict_labels(const AuRcnn& model, const RunConfig& config, const PartitionTable& table,
                                       const Dataset& data, std::span<const std::size_t> frames);

/// `iteration,epoch,loss` rows.
std::string format_loss_csv(const TrainLog& log);
/// `epoch,lr,mean_loss` rows.
std::string format_epoch_loss_csv(const TrainLog& log);

}  // namespace aurk
