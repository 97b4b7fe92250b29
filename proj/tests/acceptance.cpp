// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [--only N[,N...]] [--work DIR]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aurk/au_mask.hpp"
#include "aurk/checkpoint.hpp"
#include "aurk/csv.hpp"
#include "aurk/dataset.hpp"
#include "aurk/dynamic.hpp"
#include "aurk/face_model.hpp"
#include "aurk/geometry.hpp"
#include "aurk/labels.hpp"
#include "aurk/layers.hpp"
#include "aurk/loss.hpp"
#include "aurk/metrics.hpp"
#include "aurk/pipeline.hpp"
#include "aurk/roi_layout.hpp"
#include "aurk/trainer.hpp"
#include "support/grad_check.hpp"
#include "support/grad_suites.hpp"
#include "support/oracles.hpp"

#ifndef AURK_FIXTURE_DIR
#error "AURK_FIXTURE_DIR must be defined"
#endif

namespace aurk {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.setf(std::ios::scientific);
  s.precision(2);
  s << v;
  return s.str();
}

Outcome gradient_suites() {
  const auto start = Clock::now();
  const auto results = testing::all_grad_suites(20, 2024);
  const double secs = seconds_since(start);
  Outcome out{secs < 60.0, ""};
  for (const auto& r : results) {
    out.pass = out.pass && r.instances >= 20 && r.worst < 1e-4;
    out.detail += r.op + " " + sci(r.worst) + " x" + std::to_string(r.instances) + ", ";
  }
  out.detail += fixed(secs, 1) + " s";
  return out;
}

// True when every border row/column of the box holds a mask pixel and no mask
// pixel lies outside it, so shrinking any side by one pixel loses coverage.
bool tight_hull(const Bitmap& m, const AuBox& box, BoxSide side, double split_x) {
  const int y0 = static_cast<int>(box.y_min), x0 = static_cast<int>(box.x_min);
  const int y1 = static_cast<int>(box.y_max), x1 = static_cast<int>(box.x_max);
  bool top = false, bottom = false, left = false, right = false;
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      if (!m.get(c, r)) continue;
      const bool on_left = c + 0.5 < split_x;
      if (side != BoxSide::whole && (side == BoxSide::left) != on_left) continue;
      if (r < y0 || r >= y1 || c < x0 || c >= x1) return false;
      top = top || r == y0;
      bottom = bottom || r == y1 - 1;
      left = left || c == x0;
      right = right || c == x1 - 1;
    }
  return top && bottom && left && right;
}

Outcome geometry_suite() {
  std::mt19937_64 rng(31);
  const auto& bp4d = PartitionTable::builtin("bp4d");
  const auto& disfa = PartitionTable::builtin("disfa");
  int faces = 0, tiling_fail = 0, hull_fail = 0, containment_fail = 0, count_fail = 0;
  std::size_t ties = 0;
  for (int i = 0; i < 200; ++i) {
    const int w = 96 + 16 * (i % 4), h = 96 + 16 * ((i + 1) % 4);
    const Landmarks68 lm = random_face(rng, w, h);
    const DerivedPoints dp = derive_points(lm);
    const auto rois = partition_basic_rois(lm, dp);
    const RegionMap map(rois, w, h);
    ++faces;
    double area = 0.0;
    std::size_t owned = 0;
    for (const BasicRoi& r : rois) {
      area += std::abs(signed_area(r.polygon));
      owned += map.pixel_count(r.roi_no);
    }
    ties += map.contested_count();
    const double full = static_cast<double>(w) * h;
    if (rois.size() != 43 || map.unowned_count() != 0 || owned != static_cast<std::size_t>(w * h) ||
        std::abs(area - full) > 1e-6 * full)
      ++tiling_fail;

    const double split = dp.at("face_center").x;
    for (const AuGroup& g : bp4d.groups()) {
      const AuMask mask = compose_au_mask(g.group_id, map, bp4d);
      for (const AuBox& b : mask_to_boxes(mask, bp4d, split))
        if (!tight_hull(mask.bits, b, b.side, split)) ++hull_fail;
    }
    if (!compose_au_mask(7, map, bp4d).bits.is_subset_of(compose_au_mask(6, map, bp4d).bits)) ++containment_fail;
    if (face_boxes(lm, bp4d).size() != 9 || face_boxes(lm, disfa).size() != 7) ++count_fail;
  }
  return {tiling_fail == 0 && hull_fail == 0 && containment_fail == 0 && count_fail == 0,
          std::to_string(faces) + " faces; tiling failures " + std::to_string(tiling_fail) + ", loose hulls " +
              std::to_string(hull_fail) + ", g7 outside g6 " + std::to_string(containment_fail) +
              ", box-count failures " + std::to_string(count_fail) + "; boundary ties resolved " +
              std::to_string(ties)};
}

Outcome label_algebra_suite() {
  const auto start = Clock::now();
  const auto& toy = PartitionTable::builtin("synthetic");
  int round_trip_fail = 0;
  for (unsigned v = 0; v < 64; ++v) {
    ImageLabel img(6);
    for (std::size_t j = 0; j < 6; ++j) img.bits[j] = (v >> j) & 1u;
    LabelMatrix m = assign_roi_labels(img, toy);
    if (merge_roi_predictions(m) != img || !satisfies_space_constraint(m, toy)) ++round_trip_fail;
  }

  std::mt19937_64 rng(17);
  int idempotence_fail = 0, monotone_fail = 0;
  for (const char* profile : {"synthetic", "bp4d", "disfa"}) {
    const auto& t = PartitionTable::builtin(profile);
    for (int i = 0; i < 10000; ++i) {
      LabelMatrix m = make_label_matrix(t);
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m.set(r, c, (rng() & 3u) == 0);
      LabelMatrix once = m;
      apply_space_constraint(once, t);
      LabelMatrix twice = once;
      apply_space_constraint(twice, t);
      if (twice != once || !satisfies_space_constraint(once, t)) ++idempotence_fail;

      // Setting extra bits never clears a merged label.
      LabelMatrix more = m;
      for (int k = 0; k < 3; ++k) more.set(static_cast<int>(rng() % m.rows()), static_cast<int>(rng() % m.cols()));
      const ImageLabel before = merge_roi_predictions(m);
      const ImageLabel after = merge_roi_predictions(more);
      for (std::size_t j = 0; j < before.size(); ++j)
        if (before.bits[j] && !after.bits[j]) {
          ++monotone_fail;
          break;
        }
    }
  }
  const double secs = seconds_since(start);
  return {round_trip_fail == 0 && idempotence_fail == 0 && monotone_fail == 0 && secs < 10.0,
          "64 toy labels round-trip failures " + std::to_string(round_trip_fail) + "; 30000 matrices: " +
              "idempotence failures " + std::to_string(idempotence_fail) + ", monotonicity failures " +
              std::to_string(monotone_fail) + "; " + fixed(secs, 2) + " s"};
}

Outcome loss_value() {
  const Matrix logits(2, 3, 0.0);
  double worst = 0.0;
  for (unsigned v = 0; v < 64; ++v) {
    std::vector<std::uint8_t> y(6);
    for (std::size_t k = 0; k < 6; ++k) y[k] = (v >> k) & 1u;
    worst = std::max(worst, std::abs(sigmoid_ce_loss(logits, y).loss - 3.0 * std::log(2.0)));
  }
  return {worst <= 1e-9, "R=2 L=3 zero logits over all 64 targets, max |loss - 3 ln2| = " + sci(worst)};
}

Outcome roi_pool_oracle() {
  std::mt19937_64 rng(5);
  const Tensor4 f = testing::random_tensor({1, 3, 6, 6}, rng);
  const auto tally = testing::roi_pool_subbox_oracle(f, 5, 2, 2);
  return {tally.cases == 225 && tally.mismatches == 0,
          std::to_string(tally.cases) + " sub-boxes of a 6x6 map, " + std::to_string(tally.mismatches) +
              " mismatches"};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(9);
  const std::size_t l = 12;
  std::vector<ImageLabel> preds, truth;
  std::bernoulli_distribution p_on(0.3), t_on(0.25);
  for (int i = 0; i < 10000; ++i) {
    ImageLabel a(l), b(l);
    for (std::size_t j = 0; j < l; ++j) {
      a.bits[j] = p_on(rng);
      b.bits[j] = t_on(rng);
    }
    preds.push_back(std::move(a));
    truth.push_back(std::move(b));
  }
  std::vector<int> aus(l);
  std::iota(aus.begin(), aus.end(), 1);
  const EvalReport report = f1_per_au(preds, truth, aus);
  double f1_err = 0.0;
  for (std::size_t j = 0; j < l; ++j)
    f1_err = std::max(f1_err, std::abs(report.per_au[j].f1 - testing::naive_f1(preds, truth, j)));

  int duration_fail = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::uint8_t> seq(1 + rng() % 300);
    std::bernoulli_distribution on(std::uniform_real_distribution<double>(0.05, 0.95)(rng));
    for (auto& v : seq) v = on(rng);
    const auto [count, avg] = testing::rle_durations(seq);
    const DurationStat s = duration_segments(seq);
    if (s.segments != count || std::abs(s.avg_duration - avg) > 1e-12) ++duration_fail;
  }

  std::uniform_real_distribution<double> u(0.0, 512.0);
  std::vector<std::vector<AuBox>> frames;
  for (int i = 0; i < 5000; ++i) {
    std::vector<AuBox> f;
    for (int g = 1; g <= 9; ++g) {
      const double y = u(rng), x = u(rng);
      f.push_back({g, BoxSide::whole, y, x, y + u(rng), x + u(rng)});
    }
    frames.push_back(std::move(f));
  }
  MeanBoxAccumulator a, b;
  for (std::size_t i = 0; i < frames.size(); ++i) (i % 2 ? a : b).add(frames[i]);
  a.merge(b);
  const auto mean = a.mean();
  const auto oracle = testing::batch_mean_boxes(frames);
  double mean_err = 0.0;
  for (std::size_t s = 0; s < mean.size(); ++s)
    for (std::size_t k = 0; k < 4; ++k) mean_err = std::max(mean_err, std::abs(mean[s].coords()[k] - oracle[s][k]));

  return {f1_err <= 1e-12 && duration_fail == 0 && mean_err <= 1e-9,
          "F1 max error " + sci(f1_err) + " on 10000 frames; duration mismatches " + std::to_string(duration_fail) +
              "/1000; mean-box max error " + sci(mean_err)};
}

// Synthetic runs share one generated dataset per data directory.
struct Scores {
  double train_f1 = 0.0;
  double holdout_f1 = 0.0;
  double train_seconds = 0.0;
};

class SyntheticBench {
 public:
  explicit SyntheticBench(fs::path work) : work_(std::move(work)) {}

  RunConfig base(const std::string& data_name) const {
    RunConfig c;
    c.base_dir = work_.string();
    c.dataset = "synthetic";
    c.resolution = 128;
    c.backbone = "tiny4";
    c.seed = 7;
    c.synth.subjects = 6;
    c.synth.frames_per_subject = 100;
    c.synth.resolution = 128;
    c.holdout_subjects = {"S06"};
    c.data_dir = data_name + "/data";
    c.cache_dir = data_name + "/cache";
    return c;
  }

  void prepare(const RunConfig& c) {
    if (prepared_.count(c.data_dir)) return;
    std::ostringstream log;
    cmd_synth(c, log);
    cmd_partition(c, log);
    prepared_.insert(c.data_dir);
  }

  Scores run(RunConfig c, const std::string& name) {
    prepare(c);
    c.output_dir = "runs/" + name;
    std::ostringstream log;
    Scores s;
    const auto start = Clock::now();
    cmd_train(c, log);
    s.train_seconds = seconds_since(start);
    c.infer_split = "train";
    cmd_infer(c, log);
    s.train_f1 = cmd_eval(c, log).avg_f1;
    c.infer_split = "holdout";
    cmd_infer(c, log);
    s.holdout_f1 = cmd_eval(c, log).avg_f1;
    return s;
  }

 private:
  fs::path work_;
  std::set<std::string> prepared_;
};

std::string describe(const Scores& s) {
  return "train F1 " + fixed(s.train_f1) + ", held-out F1 " + fixed(s.holdout_f1) + ", train " +
         fixed(s.train_seconds, 0) + " s";
}

struct SyntheticResults {
  Scores per_frame;
  bool have_per_frame = false;
};

Outcome synthetic_overfit(SyntheticBench& bench, SyntheticResults& shared) {
  const RunConfig c = bench.base("short");
  const auto start = Clock::now();
  shared.per_frame = bench.run(c, "static");
  shared.have_per_frame = true;
  const double secs = seconds_since(start);
  const Scores& s = shared.per_frame;
  return {s.train_f1 >= 0.95 && s.holdout_f1 >= 0.85 && secs < 900.0,
          "600 frames at 128 px, 25 epochs: " + describe(s) + ", total " + fixed(secs, 0) + " s"};
}

Outcome mean_box_equivalence(SyntheticBench& bench, SyntheticResults& shared) {
  RunConfig c = bench.base("short");
  if (!shared.have_per_frame) {
    shared.per_frame = bench.run(c, "static");
    shared.have_per_frame = true;
  }
  c.mean_box = true;
  const Scores m = bench.run(c, "static_mean_box");
  const double gap = std::abs(m.holdout_f1 - shared.per_frame.holdout_f1);
  return {gap <= 0.05, "held-out F1 per-frame " + fixed(shared.per_frame.holdout_f1) + ", mean-box " +
                           fixed(m.holdout_f1) + ", gap " + fixed(gap)};
}

double planted_mean_duration(const RunConfig& c) {
  const LabelFile labels = read_label_file((fs::path(c.resolve(c.data_dir)) / "labels.csv").string());
  double sum = 0.0;
  int n = 0;
  for (const AuDuration& d : duration_stats(labels))
    if (d.stat.segments > 0) {
      sum += d.stat.avg_duration;
      ++n;
    }
  return n ? sum / n : 0.0;
}

// Static checkpoint copied into a two-stream model whose fusion ignores flow.
bool zero_flow_matches_static(const RunConfig& static_config) {
  const PartitionTable table = load_partition_table(static_config);
  const AuRcnn trained = restore_model(load_checkpoint(output_path(static_config, outputs::kCheckpoint)));
  RunConfig fused_config = static_config;
  fused_config.dynamic = DynamicMode::two_stream;
  AuRcnn fused(fused_config.model_config(table.au_count(), table.box_count()));
  fused.init(99);
  for (Param* dst : fused.params()) {
    if (dst->name == "fuse.weight") {
      dst->value = rgb_passthrough_weight(dst->value.n());
      continue;
    }
    for (const Param* src : trained.params())
      if (dst->name == src->name) dst->value = src->value;
  }
  const auto records = read_dataset_landmarks(fused_config);
  const Dataset data =
      load_dataset(fused_config, table, make_box_lookup(fused_config, table, records), {true, true, false});
  const auto frames = split_indices(data, Split::holdout, fused_config.holdout_subjects);
  const auto a = infer_logits(trained, static_config, data, frames);
  const auto b = infer_logits(fused, fused_config, data, frames);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].data != b[i].data) return false;
  return true;
}

Outcome dynamic_sanity(SyntheticBench& bench) {
  RunConfig c = bench.base("long");
  c.synth.mean_duration = 60.0;
  c.synth.write_flow = true;
  bench.prepare(c);
  const double planted = planted_mean_duration(c);
  const Scores s = bench.run(c, "long_static");
  // Backbone from the static run; the narrower LSTM buys more windows per epoch.
  // Padded windows give the first frames of each subject full timelines.
  RunConfig lstm = c;
  lstm.dynamic = DynamicMode::convlstm;
  lstm.backbone_init = "runs/long_static/" + std::string(outputs::kCheckpoint);
  lstm.lstm_channels = 8;
  lstm.train_window_stride = 2;
  lstm.pad_start = true;
  lstm.batch = 1;
  const Scores d = bench.run(lstm, "long_convlstm");
  RunConfig static_run = c;
  static_run.output_dir = "runs/long_static";
  const bool zero_flow = zero_flow_matches_static(static_run);
  const bool long_enough = planted >= 50.0;
  return {long_enough && d.holdout_f1 >= s.holdout_f1 - 0.02 && zero_flow,
          "avg planted segment " + fixed(planted, 1) + " frames; static " + describe(s) + "; convlstm " +
              describe(d) + "; zero-flow two-stream logits " + (zero_flow ? "identical" : "differ")};
}

Outcome format_fidelity(const fs::path& work) {
  RunConfig c;
  c.base_dir = (work / "fixture").string();
  c.dataset = "bp4d";
  c.data_dir = std::string(AURK_FIXTURE_DIR) + "/bp4d_mini";
  std::ostringstream log;
  cmd_partition(c, log);
  const auto mean = cmd_mean_box(c, log);
  const PartitionTable& table = PartitionTable::builtin("bp4d");
  const std::string text = csv::read_text_file(output_path(c, outputs::kMeanBoxes));
  const auto parsed = parse_mean_box_csv(text, table);
  const bool csv_ok = parsed == mean && format_mean_box_csv(parsed, table) == text;
  const std::string row = "(30.4, 58.1, 140.3, 222.5)";
  const auto coords = parse_box_tuple(row);
  const bool tuple_ok = coords == std::array<double, 4>{30.4, 58.1, 140.3, 222.5} && format_box_tuple(coords) == row;
  return {csv_ok && tuple_ok, std::to_string(mean.size()) + " fixture mean boxes " +
                                  (csv_ok ? "round-trip exactly" : "differ after round trip") + "; tuple " + row +
                                  (tuple_ok ? " unchanged" : " changed")};
}

}  // namespace
}  // namespace aurk

int main(int argc, char** argv) {
  using namespace aurk;
  std::set<int> only;
  fs::path work = fs::temp_directory_path() / "aurk_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only N[,N...]] [--work DIR]\n";
      return 2;
    }
  }
  fs::remove_all(work);
  fs::create_directories(work);

  SyntheticBench bench(work);
  SyntheticResults shared;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suites", gradient_suites},
      {"geometry suite", geometry_suite},
      {"label algebra suite", label_algebra_suite},
      {"loss value", loss_value},
      {"roi pooling oracle", roi_pool_oracle},
      {"metric and statistics oracles", metric_oracles},
      {"synthetic end-to-end", [&] { return synthetic_overfit(bench, shared); }},
      {"mean-box equivalence", [&] { return mean_box_equivalence(bench, shared); }},
      {"dynamic sanity", [&] { return dynamic_sanity(bench); }},
      {"format fidelity", [&] { return format_fidelity(work); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(number)) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << number << ": " << criteria[i].first << " ("
              << out.detail << ")" << std::endl;
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
