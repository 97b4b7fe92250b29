#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurk/au_mask.hpp"
#include "aurk/dynamic.hpp"
#include "aurk/layers.hpp"
#include "aurk/tensor.hpp"

namespace aurk {

enum class DynamicMode { none, convlstm, two_stream };

std::string_view to_string(DynamicMode mode) noexcept;
/// "none", "convlstm" or "two_stream"; throws Error otherwise.
DynamicMode parse_dynamic_mode(std::string_view text);

/// Convolution followed by ReLU.
struct ConvLayerSpec {
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
};

/// Named backbone stand-in and its RoI pooling size.
struct BackboneProfile {
  std::string name;
  std::vector<ConvLayerSpec> layers;
  int roi_size = 7;
};

/// Known profiles: "tiny16" and "wide16" (both overall stride 16). Throws
/// Error for any other name.
const BackboneProfile& backbone_profile(std::string_view name);

/// A chain of conv + ReLU layers.
class ConvStack {
 public:
  struct Trace {
    std::vector<Tensor4> inputs;
    std::vector<Tensor4> outputs;  // after ReLU
  };

  ConvStack() = default;
  ConvStack(const std::string& prefix, int in_channels, std::span<const ConvLayerSpec> layers);

  Tensor4 forward(const Tensor4& x, Trace* trace) const;
  /// Accumulates parameter gradients; returns d loss / d input.
  Tensor4 backward(const Trace& trace, const Tensor4& dy);

  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);
  int out_channels() const noexcept;
  int stride() const noexcept;

 private:
  std::vector<ConvLayerSpec> layers_;
  std::vector<Param> weights_;
  std::vector<Param> biases_;
};

struct ModelConfig {
  std::string backbone = "tiny16";
  int in_channels = 3;
  int roi_size = 7;
  int fc_hidden = 64;
  int labels = 0;  // L
  int boxes = 0;   // R
  DynamicMode dynamic = DynamicMode::none;
  int lstm_channels = 16;
  int lstm_kernel = 3;
  int flow_channels = 20;
};

/// Input of one forward pass. Frames are ordered window-major for ConvLSTM
/// (frame = window * time_steps + t); other modes use time_steps = 1.
struct Batch {
  Tensor4 images;            // (F, in_channels, H, W), preprocessed
  Tensor4 flow;              // (F, flow_channels, H, W); two-stream only
  std::vector<AuBox> boxes;  // F * R image-space boxes, frame-major
  int windows = 0;
  int time_steps = 1;

  int frames() const noexcept { return images.n(); }
};

/// Backbone, RoI pooling and fc head, with optional ConvLSTM timelines (one
/// kernel per box slot, shared fc head) or a flow stream fused by 1x1 conv.
/// Logits are (F * R, L), frame-major.
class AuRcnn {
 public:
  struct Trace {
    ConvStack::Trace rgb;
    ConvStack::Trace flow;
    Shape4 rgb_shape;
    Shape4 flow_shape;
    RoiPoolResult rgb_pool;
    RoiPoolResult flow_pool;
    Tensor4 fused;
    std::vector<ConvLstmHeadTrace> lstm;  // per slot
    FcHead::Trace fc;
    int windows = 0;
    int time_steps = 1;
  };

  explicit AuRcnn(ModelConfig config);

  const ModelConfig& config() const noexcept { return config_; }
  int feature_stride() const noexcept { return rgb_.stride(); }
  int feature_channels() const noexcept { return rgb_.out_channels(); }

  /// He-normal convolution and fc1 weights, N(0, 0.01) logits layer, zero
  /// biases, ConvLSTM weights N(0, 1/fan_in) with forget bias 1, and a fusion
  /// conv that starts as the RGB pass-through.
  void init(std::uint64_t seed);

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  void zero_grad();

  Matrix forward(const Batch& batch, Trace* trace) const;
  void backward(const Trace& trace, const Matrix& dlogits);

  /// Frame-major image-space boxes (F * R) -> feature-space RoI boxes whose
  /// batch index is the frame.
  std::vector<RoiBox> feature_boxes(std::span<const AuBox> boxes, int frames) const;

 private:
  ModelConfig config_;
  ConvStack rgb_;
  ConvStack flow_;
  Param fuse_w_;
  Param fuse_b_;
  std::vector<Param> lstm_w_;
  std::vector<Param> lstm_b_;
  FcHead head_;
};

}  // namespace aurk
