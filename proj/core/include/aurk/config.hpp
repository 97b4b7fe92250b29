#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/dynamic.hpp"
#include "aurk/model.hpp"
#include "aurk/optim.hpp"

namespace aurk {

inline constexpr int kConfigVersion = 1;

/// Synthetic dataset generator settings.
struct SynthConfig {
  int subjects = 6;
  int frames_per_subject = 100;
  int resolution = 128;
  std::vector<double> base_rates{0.3, 0.3, 0.3, 0.3, 0.3, 0.3};  // per label column
  double mean_duration = 30.0;    // frames per active segment
  double duration_jitter = 0.25;  // segment lengths uniform in mean * (1 +- jitter)
  double contrast = 80.0;         // stripe peak-to-peak amplitude, pixel levels
  double noise = 8.0;             // Gaussian pixel noise sigma
  double energy_margin = 100.0;   // required inside-minus-outside texture energy
  bool write_flow = false;
};

/// Every setting of a run. Paths are relative to the config file's folder.
struct RunConfig {
  std::string dataset = "synthetic";  // bp4d | disfa | synthetic
  std::string partition_table;        // empty: compiled-in table for `dataset`
  std::string data_dir = "data";
  std::string cache_dir = "cache";
  std::string output_dir = "out";

  int resolution = 512;
  std::array<double, 3> mean_pixel{128.0, 128.0, 128.0};
  double input_scale = 1.0 / 64.0;
  bool mirror = true;

  std::string backbone = "tiny16";
  int roi_size = 0;  // 0: the backbone profile's size
  int fc_hidden = 64;

  bool mean_box = false;
  DynamicMode dynamic = DynamicMode::none;
  TimelineSpec timeline{10, 4};
  int window_stride = 1;        // inference; 0: T * (skip + 1)
  int train_window_stride = 5;  // training windows
  bool pad_start = true;        // windows end at every frame; steps before frame 0 repeat it
  int lstm_channels = 16;
  int lstm_kernel = 3;
  int flow_frames = 10;

  SgdConfig optim;
  int epochs = 25;
  int batch = 5;
  std::uint64_t seed = 1;
  std::string backbone_init;  // checkpoint whose rgb.* weights seed training; empty: random

  std::vector<std::string> holdout_subjects;
  std::string infer_split = "all";  // all | train | holdout
  int overlays = 0;                 // frames rendered by `partition`

  double duration_scale = 1.0 / 60.0;
  std::string baseline_report;  // eval JSON files compared by `stats`
  std::string improved_report;

  SynthConfig synth;

  /// Directory of the config file; relative paths resolve against it.
  std::string base_dir = ".";

  std::string resolve(const std::string& path) const;
  ModelConfig model_config(int labels, int boxes) const;
};

/// Versioned JSON (`"format": "aurk-config"`, `"version": 1`). Missing keys
/// keep their defaults; unknown keys and wrong types are FormatError.
RunConfig parse_config(std::string_view json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Full dump including every default.
std::string format_config(const RunConfig& config);

/// Throws Error describing the first invalid field.
void validate_config(const RunConfig& config);

}  // namespace aurk
