#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "aurk/au_mask.hpp"
#include "aurk/cache.hpp"
#include "aurk/config.hpp"
#include "aurk/image_io.hpp"
#include "aurk/landmarks.hpp"
#include "aurk/metrics.hpp"
#include "aurk/partition_table.hpp"

namespace aurk {

/// The table file named by the config, or the compiled-in table of its dataset.
PartitionTable load_partition_table(const RunConfig& config);

/// "static", "convlstm" or "two_stream", with "+mean_box" in mean-box mode.
std::string method_name(const RunConfig& config);

/// Output files of each command, relative to config.output_dir unless noted.
namespace outputs {
inline constexpr const char* kBoxTable = "boxes.csv";  // in the cache dir
inline constexpr const char* kOverlays = "overlays";
inline constexpr const char* kCheckpoint = "model.ckpt";
inline constexpr const char* kLoss = "loss.csv";
inline constexpr const char* kEpochLoss = "epoch_loss.csv";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kEvalCsv = "eval.csv";
inline constexpr const char* kEvalJson = "eval.json";
inline constexpr const char* kDurations = "durations.csv";
inline constexpr const char* kAreas = "areas.csv";
inline constexpr const char* kCorrelationCsv = "correlation.csv";
inline constexpr const char* kCorrelationSvg = "correlation.svg";
inline constexpr const char* kMeanBoxes = "mean_boxes.csv";
}  // namespace outputs

std::string output_path(const RunConfig& config, const std::string& name);

/// Group masks blended over `base` in a fixed per-group palette.
Image8 render_overlay(const Image8& base, const Landmarks68& lm, const PartitionTable& table);

/// `group,frames,avg_area,proportion` rows.
std::string format_area_csv(std::span<const AreaStat> stats);

struct PartitionSummary {
  std::size_t frames = 0;
  CacheStats cache;
  std::size_t overlays = 0;
};

PartitionSummary cmd_partition(const RunConfig& config, std::ostream& log);
/// Returns the number of frames written.
int cmd_synth(const RunConfig& config, std::ostream& log);
/// Returns the per-epoch mean losses.
std::vector<double> cmd_train(const RunConfig& config, std::ostream& log);
/// Returns the number of frames predicted.
std::size_t cmd_infer(const RunConfig& config, std::ostream& log);
EvalReport cmd_eval(const RunConfig& config, std::ostream& log);
std::vector<AuDuration> cmd_stats(const RunConfig& config, std::ostream& log);
std::vector<AuBox> cmd_mean_box(const RunConfig& config, std::ostream& log);

}  // namespace aurk
