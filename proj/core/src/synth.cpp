#include "aurk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "aurk/au_mask.hpp"
#include "aurk/csv.hpp"
#include "aurk/error.hpp"
#include "aurk/face_model.hpp"

namespace aurk {

namespace {

int draw_length(double mean, double jitter, std::mt19937_64& rng) {
  const auto lo = std::max<long>(1, std::lround(mean * (1.0 - jitter)));
  const auto hi = std::max<long>(lo, std::lround(mean * (1.0 + jitter)));
  return static_cast<int>(std::uniform_int_distribution<long>(lo, hi)(rng));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// +1 / -1 square wave with period 4 across the stripes. Orientation
// (column + column / 3) % 3: horizontal, vertical, diagonal.
int stripe_sign(int column, int x, int y) {
  const int orientation = (column + column / 3) % 3;
  const int t = orientation == 0 ? y : orientation == 1 ? x : x + y;
  return ((t >> 1) & 1) ? 1 : -1;
}

}  // namespace

std::vector<std::uint8_t> sample_au_timeline(int frames, double base_rate, double mean_duration, double jitter,
                                             std::mt19937_64& rng) {
  std::vector<std::uint8_t> tl(static_cast<std::size_t>(std::max(frames, 0)), 0);
  if (base_rate <= 0.0 || frames <= 0) return tl;
  if (base_rate >= 1.0) {
    std::fill(tl.begin(), tl.end(), 1);
    return tl;
  }
  const double off_mean = std::max(1.0, mean_duration * (1.0 - base_rate) / base_rate);
  // Random phase: start part-way into an off segment.
  int pos = static_cast<int>(std::uniform_int_distribution<int>(0, draw_length(off_mean, jitter, rng) - 1)(rng));
  for (;;) {
    const int on = draw_length(mean_duration, jitter, rng);
    if (pos + on > frames) break;
    std::fill(tl.begin() + pos, tl.begin() + pos + on, 1);
    pos += on + draw_length(off_mean, jitter, rng);
  }
  if (std::find(tl.begin(), tl.end(), 1) == tl.end()) {
    // Nothing fitted: plant one whole segment so every video shows the AU.
    const int on = std::min(draw_length(mean_duration, jitter, rng), frames);
    const int start = std::uniform_int_distribution<int>(0, frames - on)(rng);
    std::fill(tl.begin() + start, tl.begin() + start + on, 1);
  }
  return tl;
}

SynthRenderer::SynthRenderer(const PartitionTable& table, const SynthConfig& config, const RoiLayout& layout)
    : table_(table), config_(config), layout_(layout) {
  for (int j = 0; j < table.au_count(); ++j) {
    const int au = table.au_numbers()[static_cast<std::size_t>(j)];
    const AuGroup* owner = nullptr;
    std::vector<int> blocked;
    for (const AuGroup& g : table.groups()) {
      if (std::find(g.aus.begin(), g.aus.end(), au) != g.aus.end()) owner = &g;
      const auto support = table.support_columns(g.group_id);
      if (std::find(support.begin(), support.end(), j) == support.end())
        blocked.insert(blocked.end(), g.rois.begin(), g.rois.end());
    }
    if (!owner) throw Error("AU " + std::to_string(au) + " belongs to no group");
    std::vector<int> rois;
    for (int r : owner->rois)
      if (std::find(blocked.begin(), blocked.end(), r) == blocked.end()) rois.push_back(r);
    if (rois.empty()) rois = owner->rois;
    std::array<std::uint8_t, 44> paint{};
    for (int r : rois) paint.at(static_cast<std::size_t>(r)) = 1;
    texture_rois_.push_back(std::move(rois));
    paint_.push_back(paint);
  }
}

Image8 SynthRenderer::render(const Landmarks68& lm, const ImageLabel& label, std::uint64_t noise_seed,
                             const std::array<double, 3>& tint) const {
  if (label.size() != static_cast<std::size_t>(table_.au_count()))
    throw ShapeError("label has " + std::to_string(label.size()) + " columns, table " +
                     std::to_string(table_.au_count()));
  const int w = lm.image_width, h = lm.image_height;
  std::vector<double> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        px[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
            tint[static_cast<std::size_t>(c)] + 20.0 * (static_cast<double>(y) / h - 0.5) + config_.noise * noise(rng);
  bool any = false;
  for (auto b : label.bits) any = any || b;
  if (any) {
    const DerivedPoints dp = layout_.derive(lm);
    const RegionMap regions(layout_.partition(lm, dp), w, h);
    const double amp = 0.5 * config_.contrast;
    for (int j = 0; j < table_.au_count(); ++j) {
      if (!label.bits[static_cast<std::size_t>(j)]) continue;
      const auto& paint = paint_[static_cast<std::size_t>(j)];
      const int c = j % 3;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (paint[static_cast<std::size_t>(regions.owner(x, y))])
            px[(static_cast<std::size_t>(y) * w + x) * 3 + c] += amp * stripe_sign(j, x, y);
    }
  }
  Image8 img(w, h);
  for (std::size_t i = 0; i < px.size(); ++i)
    img.rgb[i] = static_cast<std::uint8_t>(std::lround(std::clamp(px[i], 0.0, 255.0)));
  return img;
}

SynthRenderer::Energy SynthRenderer::texture_energy(const Landmarks68& lm, const ImageLabel& label, int column,
                                                    std::uint64_t noise_seed,
                                                    const std::array<double, 3>& tint) const {
  ImageLabel on = label, off = label;
  on.bits.at(static_cast<std::size_t>(column)) = 1;
  off.bits.at(static_cast<std::size_t>(column)) = 0;
  const Image8 a = render(lm, on, noise_seed, tint);
  const Image8 b = render(lm, off, noise_seed, tint);
  const int au = table_.au_numbers()[static_cast<std::size_t>(column)];
  std::vector<AuBox> boxes;
  for (const AuBox& box : face_boxes(lm, table_, layout_)) {
    const auto& aus = table_.group(box.group_id).aus;
    if (std::find(aus.begin(), aus.end(), au) != aus.end()) boxes.push_back(box);
  }
  double in_sum = 0.0, out_sum = 0.0;
  std::size_t in_n = 0, out_n = 0;
  for (int y = 0; y < lm.image_height; ++y)
    for (int x = 0; x < lm.image_width; ++x) {
      bool inside = false;
      for (const AuBox& bx : boxes)
        inside = inside || (y >= bx.y_min && y < bx.y_max && x >= bx.x_min && x < bx.x_max);
      double e = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
        e += d * d;
      }
      (inside ? in_sum : out_sum) += e / 3.0;
      ++(inside ? in_n : out_n);
    }
  return {in_n ? in_sum / static_cast<double>(in_n) : 0.0, out_n ? out_sum / static_cast<double>(out_n) : 0.0};
}

std::string synth_frame_id(int subject, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%02d/%04d", subject, frame);
  return buf;
}

SynthPlan plan_synthetic(const SynthConfig& config, const PartitionTable& table, std::uint64_t seed) {
  const auto l = static_cast<std::size_t>(table.au_count());
  if (config.base_rates.size() != l)
    throw Error("synth.base_rates has " + std::to_string(config.base_rates.size()) + " entries, the " +
                table.dataset() + " table has " + std::to_string(l) + " AUs");
  SynthPlan plan;
  plan.au_numbers.assign(table.au_numbers().begin(), table.au_numbers().end());
  std::mt19937_64 rng(seed);
  const int res = config.resolution;
  const FaceVariation subject_var{};
  FaceVariation frame_var{};
  frame_var.min_scale = 0.99;
  frame_var.max_scale = 1.01;
  frame_var.max_angle_deg = 0.5;
  frame_var.max_shift_x = 0.005;
  frame_var.max_shift_y = 0.005;
  std::uniform_real_distribution<double> tint(100.0, 150.0);
  for (int s = 1; s <= config.subjects; ++s) {
    const FacePose base = random_pose(rng, subject_var);
    plan.subject_tints.push_back({tint(rng), tint(rng), tint(rng)});
    std::vector<std::vector<std::uint8_t>> timelines;
    for (std::size_t j = 0; j < l; ++j)
      timelines.push_back(sample_au_timeline(config.frames_per_subject, config.base_rates[j], config.mean_duration,
                                             config.duration_jitter, rng));
    for (int f = 0; f < config.frames_per_subject; ++f) {
      const FacePose d = random_pose(rng, frame_var);
      const FacePose pose{base.scale * d.scale, base.angle_deg + d.angle_deg, base.shift_x + d.shift_x,
                          base.shift_y + d.shift_y};
      SynthSample sample;
      sample.subject = s;
      sample.landmarks.frame_id = synth_frame_id(s, f);
      sample.landmarks.landmarks = posed_face(pose, res, res, subject_var.jitter, rng);
      sample.label = ImageLabel(l);
      for (std::size_t j = 0; j < l; ++j) sample.label.bits[j] = timelines[j][static_cast<std::size_t>(f)];
      sample.noise_seed = splitmix64(seed ^ (static_cast<std::uint64_t>(s) << 32) ^ static_cast<std::uint64_t>(f));
      plan.samples.push_back(std::move(sample));
    }
  }
  return plan;
}

FlowField pseudo_flow(const Image8* prev, const Image8& cur, const Image8* next) {
  FlowField flow;
  flow.width = cur.width;
  flow.height = cur.height;
  flow.channels = 2;
  flow.values.assign(static_cast<std::size_t>(cur.width) * cur.height * 2, 0.0);
  auto lum = [](const Image8& im, int x, int y) {
    return (0.299 * im.at(x, y, 0) + 0.587 * im.at(x, y, 1) + 0.114 * im.at(x, y, 2)) / 255.0;
  };
  const Image8& n = next ? *next : cur;
  const Image8& p = prev ? *prev : cur;
  const std::size_t plane = static_cast<std::size_t>(cur.width) * cur.height;
  for (int y = 0; y < cur.height; ++y)
    for (int x = 0; x < cur.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * cur.width + x;
      flow.values[i] = lum(n, x, y) - lum(cur, x, y);
      flow.values[plane + i] = lum(cur, x, y) - lum(p, x, y);
    }
  return flow;
}

int write_synthetic(const SynthPlan& plan, const SynthConfig& config, const PartitionTable& table,
                    const std::string& data_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(data_dir);
  const SynthRenderer renderer(table, config);
  std::vector<LandmarkRecord> lms;
  LabelFile labels{plan.au_numbers, {}};
  std::vector<Image8> subject_frames;
  std::vector<std::string> subject_ids;
  auto flush_flow = [&] {
    if (!config.write_flow) return;
    for (std::size_t i = 0; i < subject_frames.size(); ++i) {
      const Image8* prev = i > 0 ? &subject_frames[i - 1] : nullptr;
      const Image8* next = i + 1 < subject_frames.size() ? &subject_frames[i + 1] : nullptr;
      write_flow((fs::path(data_dir) / "flow" / (subject_ids[i] + ".flow")).string(),
                 pseudo_flow(prev, subject_frames[i], next), 1.0 / 4096.0);
    }
    subject_frames.clear();
    subject_ids.clear();
  };
  int current = -1;
  for (const SynthSample& s : plan.samples) {
    if (s.subject != current) {
      flush_flow();
      current = s.subject;
    }
    const Image8 img = renderer.render(s.landmarks.landmarks, s.label, s.noise_seed,
                                       plan.subject_tints[static_cast<std::size_t>(s.subject - 1)]);
    write_ppm((fs::path(data_dir) / "images" / (s.landmarks.frame_id + ".ppm")).string(), img);
    if (config.write_flow) {
      subject_frames.push_back(img);
      subject_ids.push_back(s.landmarks.frame_id);
    }
    lms.push_back(s.landmarks);
    labels.records.push_back({s.landmarks.frame_id, s.label});
  }
  flush_flow();
  write_landmark_file((fs::path(data_dir) / "landmarks.csv").string(), lms);
  write_label_file((fs::path(data_dir) / "labels.csv").string(), labels);
  return static_cast<int>(plan.samples.size());
}

}  // namespace aurk
