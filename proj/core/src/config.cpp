#include "aurk/config.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"

namespace aurk {

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const RunConfig& c) {
  Json j;
  j["format"] = "aurk-config";
  j["version"] = kConfigVersion;
  j["dataset"] = c.dataset;
  j["partition_table"] = c.partition_table;
  j["paths"] = {{"data", c.data_dir}, {"cache", c.cache_dir}, {"output", c.output_dir}};
  j["image"] = {{"resolution", c.resolution},
                {"mean_pixel", c.mean_pixel},
                {"input_scale", c.input_scale},
                {"mirror", c.mirror}};
  j["model"] = {{"backbone", c.backbone}, {"roi_size", c.roi_size}, {"fc_hidden", c.fc_hidden}};
  j["mean_box"] = c.mean_box;
  j["dynamic"] = {{"mode", std::string(to_string(c.dynamic))},
                  {"time_steps", c.timeline.time_steps},
                  {"skip", c.timeline.skip},
                  {"window_stride", c.window_stride},
                  {"train_window_stride", c.train_window_stride},
                  {"pad_start", c.pad_start},
                  {"lstm_channels", c.lstm_channels},
                  {"lstm_kernel", c.lstm_kernel},
                  {"flow_frames", c.flow_frames}};
  j["optim"] = {{"base_lr", c.optim.base_lr},
                {"momentum", c.optim.momentum},
                {"weight_decay", c.optim.weight_decay},
                {"decay_factor", c.optim.decay_factor},
                {"decay_every", c.optim.decay_every}};
  j["train"] = {{"epochs", c.epochs}, {"batch", c.batch}, {"seed", c.seed}, {"backbone_init", c.backbone_init}};
  j["split"] = {{"holdout_subjects", c.holdout_subjects}, {"infer", c.infer_split}};
  j["partition"] = {{"overlays", c.overlays}};
  j["stats"] = {{"duration_scale", c.duration_scale},
                {"baseline_report", c.baseline_report},
                {"improved_report", c.improved_report}};
  const SynthConfig& s = c.synth;
  j["synth"] = {{"subjects", s.subjects},
                {"frames_per_subject", s.frames_per_subject},
                {"resolution", s.resolution},
                {"base_rates", s.base_rates},
                {"mean_duration", s.mean_duration},
                {"duration_jitter", s.duration_jitter},
                {"contrast", s.contrast},
                {"noise", s.noise},
                {"energy_margin", s.energy_margin},
                {"write_flow", s.write_flow}};
  return j;
}

// Copies `src` into `dst`, keeping defaults for absent keys. Objects recurse;
// every other value must match the default's JSON type.
void overlay(Json& dst, const Json& src, const std::string& path) {
  if (!src.is_object()) throw FormatError("config: '" + path + "' must be an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!dst.contains(it.key())) throw FormatError("config: unknown key '" + key + "'");
    Json& d = dst[it.key()];
    const Json& v = it.value();
    if (d.is_object()) {
      overlay(d, v, key);
      continue;
    }
    const bool numeric = d.is_number() && v.is_number();
    const bool integral = d.is_number_integer() || d.is_number_unsigned();
    if (numeric && integral && !(v.is_number_integer() || v.is_number_unsigned()))
      throw FormatError("config: '" + key + "' must be an integer");
    if (!numeric && d.type() != v.type()) throw FormatError("config: '" + key + "' has the wrong type");
    d = v;
  }
}

RunConfig from_json(const Json& j, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    c.dataset = j["dataset"].get<std::string>();
    c.partition_table = j["partition_table"].get<std::string>();
    c.data_dir = j["paths"]["data"].get<std::string>();
    c.cache_dir = j["paths"]["cache"].get<std::string>();
    c.output_dir = j["paths"]["output"].get<std::string>();
    c.resolution = j["image"]["resolution"].get<int>();
    c.mean_pixel = j["image"]["mean_pixel"].get<std::array<double, 3>>();
    c.input_scale = j["image"]["input_scale"].get<double>();
    c.mirror = j["image"]["mirror"].get<bool>();
    c.backbone = j["model"]["backbone"].get<std::string>();
    c.roi_size = j["model"]["roi_size"].get<int>();
    c.fc_hidden = j["model"]["fc_hidden"].get<int>();
    c.mean_box = j["mean_box"].get<bool>();
    const Json& d = j["dynamic"];
    c.dynamic = parse_dynamic_mode(d["mode"].get<std::string>());
    c.timeline.time_steps = d["time_steps"].get<int>();
    c.timeline.skip = d["skip"].get<int>();
    c.window_stride = d["window_stride"].get<int>();
    c.train_window_stride = d["train_window_stride"].get<int>();
    c.pad_start = d["pad_start"].get<bool>();
    c.lstm_channels = d["lstm_channels"].get<int>();
    c.lstm_kernel = d["lstm_kernel"].get<int>();
    c.flow_frames = d["flow_frames"].get<int>();
    const Json& o = j["optim"];
    c.optim.base_lr = o["base_lr"].get<double>();
    c.optim.momentum = o["momentum"].get<double>();
    c.optim.weight_decay = o["weight_decay"].get<double>();
    c.optim.decay_factor = o["decay_factor"].get<double>();
    c.optim.decay_every = o["decay_every"].get<int>();
    c.epochs = j["train"]["epochs"].get<int>();
    c.batch = j["train"]["batch"].get<int>();
    c.seed = j["train"]["seed"].get<std::uint64_t>();
    c.backbone_init = j["train"]["backbone_init"].get<std::string>();
    c.holdout_subjects = j["split"]["holdout_subjects"].get<std::vector<std::string>>();
    c.infer_split = j["split"]["infer"].get<std::string>();
    c.overlays = j["partition"]["overlays"].get<int>();
    c.duration_scale = j["stats"]["duration_scale"].get<double>();
    c.baseline_report = j["stats"]["baseline_report"].get<std::string>();
    c.improved_report = j["stats"]["improved_report"].get<std::string>();
    const Json& s = j["synth"];
    c.synth.subjects = s["subjects"].get<int>();
    c.synth.frames_per_subject = s["frames_per_subject"].get<int>();
    c.synth.resolution = s["resolution"].get<int>();
    c.synth.base_rates = s["base_rates"].get<std::vector<double>>();
    c.synth.mean_duration = s["mean_duration"].get<double>();
    c.synth.duration_jitter = s["duration_jitter"].get<double>();
    c.synth.contrast = s["contrast"].get<double>();
    c.synth.noise = s["noise"].get<double>();
    c.synth.energy_margin = s["energy_margin"].get<double>();
    c.synth.write_flow = s["write_flow"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

ModelConfig RunConfig::model_config(int labels, int boxes) const {
  ModelConfig m;
  m.backbone = backbone;
  m.in_channels = 3;
  m.roi_size = roi_size > 0 ? roi_size : backbone_profile(backbone).roi_size;
  m.fc_hidden = fc_hidden;
  m.labels = labels;
  m.boxes = boxes;
  m.dynamic = dynamic;
  m.lstm_channels = lstm_channels;
  m.lstm_kernel = lstm_kernel;
  m.flow_channels = 2 * flow_frames;
  return m;
}

RunConfig parse_config(std::string_view json_text, const std::string& base_dir) {
  Json src;
  try {
    src = Json::parse(json_text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!src.is_object()) throw FormatError("config must be a JSON object");
  if (!src.contains("format") || src["format"] != "aurk-config")
    throw FormatError("config: missing \"format\": \"aurk-config\"");
  if (!src.contains("version") || !src["version"].is_number_integer())
    throw FormatError("config: missing integer \"version\"");
  if (src["version"].get<int>() != kConfigVersion)
    throw VersionError("config version " + std::to_string(src["version"].get<int>()) + ", this build reads " +
                       std::to_string(kConfigVersion));
  Json merged = to_json(RunConfig{});
  overlay(merged, src, "");
  RunConfig c = from_json(merged, base_dir);
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  const std::string text = csv::read_text_file(path);
  std::string base = std::filesystem::path(path).parent_path().string();
  if (base.empty()) base = ".";
  return parse_config(text, base);
}

std::string format_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error("config: " + what);
  };
  require(c.dataset == "bp4d" || c.dataset == "disfa" || c.dataset == "synthetic",
          "dataset must be bp4d, disfa or synthetic");
  require(c.resolution >= 16, "image.resolution must be >= 16");
  require(c.input_scale > 0.0, "image.input_scale must be > 0");
  backbone_profile(c.backbone);
  require(c.roi_size >= 0, "model.roi_size must be >= 0");
  require(c.fc_hidden >= 1, "model.fc_hidden must be >= 1");
  require(c.timeline.time_steps >= 1 && c.timeline.skip >= 0, "dynamic.time_steps >= 1 and skip >= 0");
  require(c.window_stride >= 0 && c.train_window_stride >= 1, "dynamic window strides out of range");
  require(c.lstm_channels >= 1 && c.lstm_kernel >= 1 && c.lstm_kernel % 2 == 1,
          "dynamic.lstm_channels >= 1 and an odd lstm_kernel");
  require(c.flow_frames >= 1, "dynamic.flow_frames must be >= 1");
  require(c.optim.base_lr > 0.0 && c.optim.momentum >= 0.0 && c.optim.momentum < 1.0 &&
              c.optim.weight_decay >= 0.0 && c.optim.decay_factor > 0.0 && c.optim.decay_every >= 1,
          "optim values out of range");
  require(c.epochs >= 0 && c.batch >= 1, "train.epochs >= 0 and train.batch >= 1");
  require(c.infer_split == "all" || c.infer_split == "train" || c.infer_split == "holdout",
          "split.infer must be all, train or holdout");
  require(c.overlays >= 0, "partition.overlays must be >= 0");
  require(c.duration_scale > 0.0, "stats.duration_scale must be > 0");
  const SynthConfig& s = c.synth;
  require(s.subjects >= 1 && s.frames_per_subject >= 1 && s.resolution >= 32, "synth sizes out of range");
  require(s.mean_duration >= 1.0 && s.duration_jitter >= 0.0 && s.duration_jitter < 1.0,
          "synth.mean_duration >= 1 and 0 <= duration_jitter < 1");
  for (double r : s.base_rates) require(r >= 0.0 && r <= 1.0, "synth.base_rates must lie in [0, 1]");
  require(s.contrast >= 0.0 && s.noise >= 0.0, "synth.contrast and synth.noise must be >= 0");
}

}  // namespace aurk
