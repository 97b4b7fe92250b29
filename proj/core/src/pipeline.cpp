#include "aurk/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <unordered_set>

#include "aurk/checkpoint.hpp"
#include "aurk/csv.hpp"
#include "aurk/dataset.hpp"
#include "aurk/error.hpp"
#include "aurk/labels.hpp"
#include "aurk/synth.hpp"
#include "aurk/trainer.hpp"

namespace aurk {

namespace fs = std::filesystem;

PartitionTable load_partition_table(const RunConfig& config) {
  if (!config.partition_table.empty()) return PartitionTable::load(config.resolve(config.partition_table));
  return PartitionTable::builtin(config.dataset);
}

std::string method_name(const RunConfig& config) {
  std::string name = config.dynamic == DynamicMode::none ? "static" : std::string(to_string(config.dynamic));
  if (config.mean_box) name += "+mean_box";
  return name;
}

std::string output_path(const RunConfig& config, const std::string& name) {
  return (fs::path(config.resolve(config.output_dir)) / name).string();
}

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette{{
    {230, 25, 75},
    {60, 180, 75},
    {255, 225, 25},
    {0, 130, 200},
    {245, 130, 48},
    {145, 30, 180},
    {70, 240, 240},
    {240, 50, 230},
}};

void write_output(const RunConfig& config, const std::string& name, const std::string& text) {
  const std::string path = output_path(config, name);
  fs::create_directories(fs::path(path).parent_path());
  csv::write_text_file(path, text);
}

}  // namespace

Image8 render_overlay(const Image8& base, const Landmarks68& lm, const PartitionTable& table) {
  Image8 out = base;
  const RoiLayout& layout = RoiLayout::builtin();
  const RegionMap regions(layout.partition(lm, layout.derive(lm)), base.width, base.height);
  std::size_t k = 0;
  for (const AuGroup& g : table.groups()) {
    const auto& colour = kPalette[k++ % kPalette.size()];
    const AuMask mask = compose_au_mask(g.group_id, regions, table);
    for (int y = 0; y < base.height; ++y)
      for (int x = 0; x < base.width; ++x)
        if (mask.bits.get(x, y))
          for (int c = 0; c < 3; ++c) {
            auto& px = out.rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(base.width) +
                                static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c)];
            px = static_cast<std::uint8_t>((px + colour[static_cast<std::size_t>(c)]) / 2);
          }
  }
  return out;
}

std::string format_area_csv(std::span<const AreaStat> stats) {
  std::string out = "group,frames,avg_area,proportion\n";
  for (const AreaStat& s : stats)
    out += std::to_string(s.group_id) + "," + std::to_string(s.frames) + "," + csv::format_double(s.avg_area) +
           "," + format_percent(s.proportion) + "\n";
  return out;
}

PartitionSummary cmd_partition(const RunConfig& config, std::ostream& log) {
  const PartitionTable table = load_partition_table(config);
  const auto records = read_dataset_landmarks(config);
  MaskCache cache = MaskCache::create(config.resolve(config.cache_dir), table);
  std::vector<MaskCacheEntry> entries;
  for (const LandmarkRecord& r : records) entries.push_back({r.frame_id, cache.version_hash(), cache.get_or_compute(r)});
  csv::write_text_file((fs::path(cache.dir()) / outputs::kBoxTable).string(), format_box_table(entries));

  PartitionSummary summary{records.size(), cache.stats(), 0};
  const fs::path image_dir = fs::path(config.resolve(config.data_dir)) / "images";
  const std::size_t n_overlays = std::min(records.size(), static_cast<std::size_t>(std::max(config.overlays, 0)));
  for (std::size_t i = 0; i < n_overlays; ++i) {
    const LandmarkRecord& r = records[i];
    const fs::path src = image_dir / (r.frame_id + ".ppm");
    Image8 base(r.landmarks.image_width, r.landmarks.image_height);
    std::fill(base.rgb.begin(), base.rgb.end(), std::uint8_t{96});
    if (fs::exists(src)) base = read_ppm(src.string());
    if (base.width != r.landmarks.image_width || base.height != r.landmarks.image_height)
      throw ShapeError("frame '" + r.frame_id + "': image size differs from the landmark record");
    write_ppm(output_path(config, std::string(outputs::kOverlays) + "/" + r.frame_id + ".ppm"),
              render_overlay(base, r.landmarks, table));
    ++summary.overlays;
  }
  log << "partition: " << summary.frames << " frames, " << summary.cache.hits << " cache hits, "
      << summary.cache.misses << " computed, " << summary.overlays << " overlays\n";
  return summary;
}

int cmd_synth(const RunConfig& config, std::ostream& log) {
  const PartitionTable table = load_partition_table(config);
  const SynthPlan plan = plan_synthetic(config.synth, table, config.seed);
  const int n = write_synthetic(plan, config.synth, table, config.resolve(config.data_dir));
  log << "synth: " << n << " frames written to " << config.resolve(config.data_dir) << "\n";
  return n;
}

std::vector<double> cmd_train(const RunConfig& config, std::ostream& log) {
  const PartitionTable table = load_partition_table(config);
  const auto records = read_dataset_landmarks(config);
  const Dataset data = load_dataset(config, table, make_box_lookup(config, table, records),
                                    {true, config.dynamic == DynamicMode::two_stream, true});
  const auto frames = split_indices(data, Split::train, config.holdout_subjects);
  log << "train: " << frames.size() << " frames, method " << method_name(config) << "\n";
  std::vector<Param> backbone_init;
  if (!config.backbone_init.empty()) {
    backbone_init = load_checkpoint(config.resolve(config.backbone_init)).params;
    log << "train: backbone from " << config.backbone_init << "\n";
  }
  const TrainOutcome outcome = train_model(config, table, data, frames, &log, backbone_init);
  fs::create_directories(config.resolve(config.output_dir));
  save_checkpoint(output_path(config, outputs::kCheckpoint), outcome.model, config.dataset, table.content_hash(),
                  &outcome.optim);
  write_output(config, outputs::kLoss, format_loss_csv(outcome.log));
  write_output(config, outputs::kEpochLoss, format_epoch_loss_csv(outcome.log));
  return outcome.log.epoch_mean_loss;
}

std::size_t cmd_infer(const RunConfig& config, std::ostream& log) {
  const PartitionTable table = load_partition_table(config);
  const Checkpoint ckpt = load_checkpoint(output_path(config, outputs::kCheckpoint));
  check_compatible(ckpt, config.dataset, table.content_hash(), config.model_config(table.au_count(), table.box_count()));
  const AuRcnn model = restore_model(ckpt);
  const auto records = read_dataset_landmarks(config);
  const Dataset data = load_dataset(config, table, make_box_lookup(config, table, records),
                                    {true, config.dynamic == DynamicMode::two_stream, false});
  const auto frames = split_indices(data, parse_split(config.infer_split), config.holdout_subjects);
  const auto preds = predict_labels(model, config, table, data, frames);
  LabelFile out{data.au_numbers, {}};
  for (std::size_t i = 0; i < frames.size(); ++i) out.records.push_back({data.frames[frames[i]].id, preds[i]});
  write_output(config, outputs::kPredictions, format_label_file(out));
  log << "infer: " << frames.size() << " frames (" << config.infer_split << ")\n";
  return frames.size();
}

EvalReport cmd_eval(const RunConfig& config, std::ostream& log) {
  const LabelFile preds = read_label_file(output_path(config, outputs::kPredictions));
  const LabelFile all_truth = read_label_file((fs::path(config.resolve(config.data_dir)) / "labels.csv").string());
  std::unordered_set<std::string> known;
  for (const auto& r : all_truth.records) known.insert(r.frame_id);
  std::unordered_set<std::string> wanted;
  for (const auto& r : preds.records) {
    if (!known.count(r.frame_id)) throw ShapeError("predicted frame '" + r.frame_id + "' has no ground-truth row");
    wanted.insert(r.frame_id);
  }
  LabelFile truth{all_truth.au_numbers, {}};
  for (const auto& r : all_truth.records)
    if (wanted.count(r.frame_id)) truth.records.push_back(r);
  const EvalReport report = evaluate_label_files(preds, truth);
  const std::string method = method_name(config);
  const std::pair<std::string, EvalReport> column{method, report};
  write_output(config, outputs::kEvalCsv, format_eval_csv(std::span(&column, 1)));
  write_output(config, outputs::kEvalJson, format_eval_json(method, report));
  log << "eval: " << preds.records.size() << " frames, avg F1 " << report.avg_f1 << "\n";
  return report;
}

std::vector<AuDuration> cmd_stats(const RunConfig& config, std::ostream& log) {
  const PartitionTable table = load_partition_table(config);
  const fs::path data_dir = config.resolve(config.data_dir);
  const LabelFile labels = read_label_file((data_dir / "labels.csv").string());
  const auto durations = duration_stats(labels);
  write_output(config, outputs::kDurations, format_duration_csv(durations));

  const auto records = read_dataset_landmarks(config);
  const Landmarks68& first = records.front().landmarks;
  AreaAccumulator areas(first.image_width, first.image_height);
  const RoiLayout& layout = RoiLayout::builtin();
  for (const LandmarkRecord& r : records) {
    const RegionMap regions(layout.partition(r.landmarks, layout.derive(r.landmarks)), r.landmarks.image_width,
                            r.landmarks.image_height);
    for (const AuGroup& g : table.groups()) areas.add_mask(compose_au_mask(g.group_id, regions, table));
  }
  write_output(config, outputs::kAreas, format_area_csv(areas.result()));

  if (!config.baseline_report.empty() && !config.improved_report.empty()) {
    const EvalReport base = parse_eval_json(csv::read_text_file(config.resolve(config.baseline_report)));
    const EvalReport better = parse_eval_json(csv::read_text_file(config.resolve(config.improved_report)));
    std::vector<int> aus;
    std::vector<double> gain, dur;
    for (const AuDuration& d : durations) {
      const auto find = [&](const EvalReport& r) {
        for (const AuScore& s : r.per_au)
          if (s.au == d.au) return s.f1;
        throw ShapeError("eval summary has no AU " + std::to_string(d.au));
      };
      aus.push_back(d.au);
      gain.push_back(find(better) - find(base));
      dur.push_back(d.stat.avg_duration);
    }
    const CorrelationReport corr = correlation_report(aus, gain, dur, config.duration_scale);
    write_output(config, outputs::kCorrelationCsv, format_correlation_csv(corr));
    write_output(config, outputs::kCorrelationSvg, render_correlation_svg(corr));
    log << "stats: pearson r " << corr.r << "\n";
  }
  log << "stats: " << durations.size() << " AUs, " << records.size() << " frames\n";
  return durations;
}

std::vector<AuBox> cmd_mean_box(const RunConfig& config, std::ostream& log) {
  const PartitionTable table = load_partition_table(config);
  const auto records = read_dataset_landmarks(config);
  const MaskCache cache = MaskCache::open(config.resolve(config.cache_dir), table);
  const auto mean = training_mean_boxes(config, records, cache);
  write_output(config, outputs::kMeanBoxes, format_mean_box_csv(mean, table));
  log << "mean-box: " << mean.size() << " boxes\n";
  return mean;
}

}  // namespace aurk
