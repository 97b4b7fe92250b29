#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aurk/config.hpp"
#include "aurk/image_io.hpp"
#include "aurk/labels.hpp"
#include "aurk/landmarks.hpp"
#include "aurk/partition_table.hpp"
#include "aurk/roi_layout.hpp"

namespace aurk {

/// Binary activity of one AU over `frames` frames: alternating off and on
/// segments whose lengths are uniform in mean * (1 +- jitter). On segments
/// have mean `mean_duration`; off segments are sized so the active fraction
/// approaches `base_rate`. An on segment is only placed if it fits entirely.
/// A positive rate always yields at least one segment.
std::vector<std::uint8_t> sample_au_timeline(int frames, double base_rate, double mean_duration, double jitter,
                                             std::mt19937_64& rng);

/// Paints a face image whose texture encodes the active AUs. Label column j
/// draws a square-wave stripe pattern (period 4 px) on its texture RoIs:
/// colour channel j % 3, orientation (j + j / 3) % 3 (horizontal, vertical,
/// diagonal). The rest of the image is a smooth tinted ramp plus noise.
///
/// The texture RoIs of column j are the basic RoIs of its group that no group
/// lacking j in its label support also covers, so a box whose row must read 0
/// for j sees as little of j's texture as the layout allows. When that leaves
/// nothing, the whole group is used.
class SynthRenderer {
 public:
  SynthRenderer(const PartitionTable& table, const SynthConfig& config,
                const RoiLayout& layout = RoiLayout::builtin());

  Image8 render(const Landmarks68& lm, const ImageLabel& label, std::uint64_t noise_seed,
                const std::array<double, 3>& tint) const;

  /// Mean squared pixel change caused by switching column `column` on, inside
  /// and outside the union of its group's boxes.
  struct Energy {
    double inside = 0.0;
    double outside = 0.0;
  };
  std::span<const int> texture_rois(int column) const { return texture_rois_.at(static_cast<std::size_t>(column)); }

  Energy texture_energy(const Landmarks68& lm, const ImageLabel& label, int column, std::uint64_t noise_seed,
                        const std::array<double, 3>& tint) const;

 private:
  const PartitionTable& table_;
  SynthConfig config_;
  const RoiLayout& layout_;
  std::vector<std::vector<int>> texture_rois_;
  std::vector<std::array<std::uint8_t, 44>> paint_;  // per column, indexed by RoI number
};

struct SynthSample {
  LandmarkRecord landmarks;
  ImageLabel label;
  std::uint64_t noise_seed = 0;
  int subject = 0;
};

/// Everything except pixels: deterministic in (config, table, seed).
struct SynthPlan {
  std::vector<SynthSample> samples;
  std::vector<std::array<double, 3>> subject_tints;
  std::vector<int> au_numbers;
};

SynthPlan plan_synthetic(const SynthConfig& config, const PartitionTable& table, std::uint64_t seed);

/// Renders the plan and writes landmarks.csv, labels.csv, images/ and (when
/// enabled) flow/ under `data_dir`. Returns the number of frames written.
int write_synthetic(const SynthPlan& plan, const SynthConfig& config, const PartitionTable& table,
                    const std::string& data_dir);

/// Pseudo-flow between consecutive frames of one subject: channel 0 is the
/// forward luminance difference (t+1 minus t), channel 1 the backward one,
/// both divided by 255. Ends of the sequence repeat the edge frame.
FlowField pseudo_flow(const Image8* prev, const Image8& cur, const Image8* next);

/// "S03/0042" style id.
std::string synth_frame_id(int subject, int frame);

}  // namespace aurk
