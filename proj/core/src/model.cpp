#include "aurk/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "aurk/error.hpp"

namespace aurk {

std::string_view to_string(DynamicMode mode) noexcept {
  switch (mode) {
    case DynamicMode::none: return "none";
    case DynamicMode::convlstm: return "convlstm";
    case DynamicMode::two_stream: return "two_stream";
  }
  return "none";
}

DynamicMode parse_dynamic_mode(std::string_view text) {
  if (text == "none") return DynamicMode::none;
  if (text == "convlstm") return DynamicMode::convlstm;
  if (text == "two_stream") return DynamicMode::two_stream;
  throw Error("unknown dynamic mode '" + std::string(text) + "' (expected none, convlstm or two_stream)");
}

const BackboneProfile& backbone_profile(std::string_view name) {
  static const std::vector<BackboneProfile> profiles = {
      {"tiny16", {{16, 4, 4, 0}, {32, 4, 4, 0}}, 7},
      {"wide16", {{32, 4, 4, 0}, {64, 4, 4, 0}}, 7},
      {"tiny8", {{16, 4, 4, 0}, {32, 3, 2, 1}}, 7},
      {"tiny4", {{16, 4, 4, 0}, {32, 3, 1, 1}}, 7},
  };
  for (const BackboneProfile& p : profiles)
    if (p.name == name) return p;
  throw Error("unknown backbone profile '" + std::string(name) + "' (expected tiny16, wide16, tiny8 or tiny4)");
}

ConvStack::ConvStack(const std::string& prefix, int in_channels, std::span<const ConvLayerSpec> layers)
    : layers_(layers.begin(), layers.end()) {
  if (layers_.empty()) throw ShapeError("backbone needs at least one conv layer");
  int c = in_channels;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const ConvLayerSpec& l = layers_[k];
    if (l.out_channels < 1 || l.kernel < 1 || l.stride < 1 || l.pad < 0)
      throw ShapeError("invalid conv layer " + std::to_string(k));
    const std::string name = prefix + "conv" + std::to_string(k + 1);
    weights_.push_back({name + ".weight", Tensor4({l.out_channels, c, l.kernel, l.kernel})});
    biases_.push_back({name + ".bias", Tensor4({1, l.out_channels, 1, 1})});
    c = l.out_channels;
  }
}

Tensor4 ConvStack::forward(const Tensor4& x, Trace* trace) const {
  if (trace) {
    trace->inputs.clear();
    trace->outputs.clear();
  }
  Tensor4 cur = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Tensor4 y = relu(conv2d(cur, weights_[k].value, &biases_[k].value, layers_[k].stride, layers_[k].pad));
    if (trace) {
      trace->inputs.push_back(std::move(cur));
      trace->outputs.push_back(y);
    }
    cur = std::move(y);
  }
  return cur;
}

Tensor4 ConvStack::backward(const Trace& trace, const Tensor4& dy) {
  if (trace.inputs.size() != layers_.size()) throw ShapeError("backbone trace does not match the layers");
  Tensor4 grad = dy;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Tensor4 dz = relu_backward(trace.outputs[k], grad);
    grad = conv2d_backward(trace.inputs[k], weights_[k].value, &biases_[k].value, layers_[k].stride,
                           layers_[k].pad, dz);
  }
  return grad;
}

void ConvStack::init(std::mt19937_64& rng) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    he_normal(weights_[k].value, rng);
    std::fill(biases_[k].value.values().begin(), biases_[k].value.values().end(), 0.0);
  }
}

void ConvStack::collect(std::vector<Param*>& out) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    out.push_back(&weights_[k]);
    out.push_back(&biases_[k]);
  }
}

int ConvStack::out_channels() const noexcept { return layers_.empty() ? 0 : layers_.back().out_channels; }

int ConvStack::stride() const noexcept {
  int s = 1;
  for (const ConvLayerSpec& l : layers_) s *= l.stride;
  return s;
}

AuRcnn::AuRcnn(ModelConfig config) : config_(std::move(config)) {
  if (config_.labels < 1 || config_.boxes < 1) throw ShapeError("model needs L >= 1 and R >= 1");
  if (config_.roi_size < 1 || config_.fc_hidden < 1) throw ShapeError("RoI size and fc width must be >= 1");
  const BackboneProfile& profile = backbone_profile(config_.backbone);
  rgb_ = ConvStack("rgb.", config_.in_channels, profile.layers);
  const int c = rgb_.out_channels();
  const int cells = config_.roi_size * config_.roi_size;
  int head_in = c * cells;
  if (config_.dynamic == DynamicMode::two_stream) {
    if (config_.flow_channels < 1) throw ShapeError("flow stream needs at least one channel");
    flow_ = ConvStack("flow.", config_.flow_channels, profile.layers);
    fuse_w_ = {"fuse.weight", Tensor4({c, 2 * c, 1, 1})};
    fuse_b_ = {"fuse.bias", Tensor4({1, c, 1, 1})};
  } else if (config_.dynamic == DynamicMode::convlstm) {
    const int ch = config_.lstm_channels;
    const int k = config_.lstm_kernel;
    if (ch < 1 || k < 1 || k % 2 == 0) throw ShapeError("ConvLSTM needs channels >= 1 and an odd kernel");
    for (int r = 0; r < config_.boxes; ++r) {
      const std::string name = "lstm" + std::to_string(r + 1);
      lstm_w_.push_back({name + ".weight", Tensor4({4 * ch, c + ch, k, k})});
      lstm_b_.push_back({name + ".bias", Tensor4({1, 4 * ch, 1, 1})});
    }
    head_in = ch * cells;
  }
  head_ = FcHead("head.", head_in, config_.fc_hidden, config_.labels);
}

void AuRcnn::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  rgb_.init(rng);
  if (config_.dynamic == DynamicMode::two_stream) {
    flow_.init(rng);
    fuse_w_.value = rgb_passthrough_weight(rgb_.out_channels());
    fuse_b_.value = Tensor4(fuse_b_.value.shape());
  }
  for (std::size_t r = 0; r < lstm_w_.size(); ++r) {
    Tensor4& w = lstm_w_[r].value;
    normal_fill(w, std::sqrt(1.0 / (w.c() * w.h() * w.w())), rng);
    Tensor4& b = lstm_b_[r].value;
    b = Tensor4(b.shape());
    const int ch = config_.lstm_channels;
    for (int k = 0; k < ch; ++k) b.at(0, ch + k, 0, 0) = 1.0;
  }
  head_.init(rng);
}

std::vector<Param*> AuRcnn::params() {
  std::vector<Param*> out;
  rgb_.collect(out);
  if (config_.dynamic == DynamicMode::two_stream) {
    flow_.collect(out);
    out.push_back(&fuse_w_);
    out.push_back(&fuse_b_);
  }
  for (std::size_t r = 0; r < lstm_w_.size(); ++r) {
    out.push_back(&lstm_w_[r]);
    out.push_back(&lstm_b_[r]);
  }
  head_.collect(out);
  return out;
}

std::vector<const Param*> AuRcnn::params() const {
  auto mut = const_cast<AuRcnn*>(this)->params();
  return {mut.begin(), mut.end()};
}

void AuRcnn::zero_grad() {
  for (Param* p : params()) p->value.zero_grad();
}

std::vector<RoiBox> AuRcnn::feature_boxes(std::span<const AuBox> boxes, int frames) const {
  const auto r_count = static_cast<std::size_t>(config_.boxes);
  if (boxes.size() != static_cast<std::size_t>(frames) * r_count)
    throw ShapeError("batch has " + std::to_string(boxes.size()) + " boxes for " + std::to_string(frames) +
                     " frames of " + std::to_string(r_count));
  std::vector<RoiBox> out;
  out.reserve(boxes.size());
  const int stride = feature_stride();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const AuBox b = scale_box_to_feature(boxes[i], stride);
    out.push_back({static_cast<int>(i / r_count), b.y_min, b.x_min, b.y_max, b.x_max});
  }
  return out;
}

namespace {

// Rows r, r + R, r + 2R, ... of a frame-major (F * R, ...) tensor.
Tensor4 slot_rows(const Tensor4& all, int boxes, int slot) {
  const int frames = all.n() / boxes;
  Tensor4 out({frames, all.c(), all.h(), all.w()});
  const std::size_t plane = out.size() / static_cast<std::size_t>(std::max(frames, 1));
  for (int f = 0; f < frames; ++f) {
    const auto src = all.values().subspan(static_cast<std::size_t>(f * boxes + slot) * plane, plane);
    std::copy(src.begin(), src.end(), out.values().begin() + static_cast<std::ptrdiff_t>(f * plane));
  }
  return out;
}

void add_slot_rows(Tensor4& all, const Tensor4& part, int boxes, int slot) {
  const std::size_t plane = part.size() / static_cast<std::size_t>(std::max(part.n(), 1));
  auto dst = all.values();
  const auto src = part.values();
  for (int f = 0; f < part.n(); ++f)
    for (std::size_t k = 0; k < plane; ++k)
      dst[static_cast<std::size_t>(f * boxes + slot) * plane + k] += src[static_cast<std::size_t>(f) * plane + k];
}

}  // namespace

Matrix AuRcnn::forward(const Batch& batch, Trace* trace) const {
  const int frames = batch.frames();
  if (batch.images.c() != config_.in_channels)
    throw ShapeError("images have " + std::to_string(batch.images.c()) + " channels, model expects " +
                     std::to_string(config_.in_channels));
  const RoiSpec spec{feature_boxes(batch.boxes, frames), config_.roi_size, config_.roi_size};
  const Tensor4 feat = rgb_.forward(batch.images, trace ? &trace->rgb : nullptr);
  RoiPoolResult pooled = roi_pool(feat, spec);
  if (trace) {
    trace->rgb_shape = feat.shape();
    trace->windows = batch.windows;
    trace->time_steps = batch.time_steps;
  }
  const int r_count = config_.boxes;
  const int l_count = config_.labels;
  Matrix logits;
  switch (config_.dynamic) {
    case DynamicMode::none: {
      logits = head_.forward(flatten(pooled.output), trace ? &trace->fc : nullptr);
      break;
    }
    case DynamicMode::two_stream: {
      if (!(batch.flow.shape() == Shape4{frames, config_.flow_channels, batch.images.h(), batch.images.w()}))
        throw ShapeError("flow input " + batch.flow.shape().str() + " does not match the images");
      const Tensor4 ffeat = flow_.forward(batch.flow, trace ? &trace->flow : nullptr);
      RoiPoolResult fpooled = roi_pool(ffeat, spec);
      Tensor4 fused = two_stream_fuse(pooled.output, fpooled.output, fuse_w_.value, &fuse_b_.value);
      logits = head_.forward(flatten(fused), trace ? &trace->fc : nullptr);
      if (trace) {
        trace->flow_shape = ffeat.shape();
        trace->flow_pool = std::move(fpooled);
        trace->fused = std::move(fused);
      }
      break;
    }
    case DynamicMode::convlstm: {
      if (batch.windows * batch.time_steps != frames)
        throw ShapeError("ConvLSTM batch has " + std::to_string(frames) + " frames, expected windows x T = " +
                         std::to_string(batch.windows * batch.time_steps));
      logits = Matrix(frames * r_count, l_count);
      if (trace) trace->lstm.assign(static_cast<std::size_t>(r_count), {});
      for (int r = 0; r < r_count; ++r) {
        const TimelineBatch seq{BoxSlot{}, batch.windows, batch.time_steps, slot_rows(pooled.output, r_count, r)};
        const auto ur = static_cast<std::size_t>(r);
        const Matrix part = convlstm_head(seq, lstm_w_[ur].value, lstm_b_[ur].value, head_,
                                          trace ? &trace->lstm[ur] : nullptr);
        for (int f = 0; f < frames; ++f)
          std::copy(part.row(f).begin(), part.row(f).end(), logits.row(f * r_count + r).begin());
      }
      break;
    }
  }
  if (trace) trace->rgb_pool = std::move(pooled);
  return logits;
}

void AuRcnn::backward(const Trace& trace, const Matrix& dlogits) {
  const int r_count = config_.boxes;
  Tensor4 dpooled(trace.rgb_pool.output.shape());
  switch (config_.dynamic) {
    case DynamicMode::none: {
      dpooled = unflatten(head_.backward(trace.fc, dlogits), dpooled.shape());
      break;
    }
    case DynamicMode::two_stream: {
      const Tensor4 dfused = unflatten(head_.backward(trace.fc, dlogits), trace.fused.shape());
      FuseGrad g = two_stream_fuse_backward(trace.rgb_pool.output, trace.flow_pool.output, fuse_w_.value,
                                            &fuse_b_.value, dfused);
      dpooled = std::move(g.drgb);
      flow_.backward(trace.flow, roi_pool_backward(trace.flow_shape, trace.flow_pool, g.dflow));
      break;
    }
    case DynamicMode::convlstm: {
      const int frames = dlogits.rows / r_count;
      for (int r = 0; r < r_count; ++r) {
        Matrix part(frames, dlogits.cols);
        for (int f = 0; f < frames; ++f) {
          const auto src = dlogits.row(f * r_count + r);
          std::copy(src.begin(), src.end(), part.row(f).begin());
        }
        const auto ur = static_cast<std::size_t>(r);
        const Tensor4 dseq =
            convlstm_head_backward(trace.lstm[ur], lstm_w_[ur].value, lstm_b_[ur].value, head_, part);
        add_slot_rows(dpooled, dseq, r_count, r);
      }
      break;
    }
  }
  rgb_.backward(trace.rgb, roi_pool_backward(trace.rgb_shape, trace.rgb_pool, dpooled));
}

}  // namespace aurk
