#pragma once

#include <span>
#include <vector>

#include "aurk/layers.hpp"
#include "aurk/partition_table.hpp"
#include "aurk/tensor.hpp"

namespace aurk {

/// Sampling of one window: `time_steps` frames, `skip` frames dropped between
/// consecutive steps.
struct TimelineSpec {
  int time_steps = 10;
  int skip = 4;

  int stride() const noexcept { return skip + 1; }
  /// Frames a window covers: (T - 1) * (skip + 1) + 1.
  int span() const noexcept { return (time_steps - 1) * stride() + 1; }
};

/// Frame indices of the window starting at `start`.
std::vector<int> timeline_frames(int start, const TimelineSpec& spec);

/// Window starts for a video of `length` frames, `window_stride` apart
/// (0 selects T * (skip + 1), i.e. non-overlapping windows). Throws
/// InsufficientFramesError when the video is shorter than one window.
std::vector<int> window_starts(int length, const TimelineSpec& spec, int window_stride = 0);

/// One AU-group line: a (N, T, C, H, W) sequence stored as (N*T, C, H, W),
/// n-major.
struct TimelineBatch {
  BoxSlot slot;
  int batch = 0;
  int time_steps = 0;
  Tensor4 data;
};

/// Connects each box slot to the same slot across the frames of every window.
/// `frame_features[f]` holds frame f's RoI features, (R, C, H, W) in slot order.
std::vector<TimelineBatch> build_timelines(std::span<const Tensor4> frame_features,
                                           std::span<const BoxSlot> slots,
                                           std::span<const int> window_starts_,
                                           const TimelineSpec& spec);

struct ConvLstmState {
  Tensor4 h;
  Tensor4 c;
};

ConvLstmState zero_state(int n, int channels, int height, int width);

/// Values kept from a forward step for the backward pass.
struct ConvLstmStepTrace {
  Tensor4 xh;  // concat(x, h_prev) along channels
  Tensor4 i, f, o, g;
  Tensor4 c_prev;
  Tensor4 tanh_c;
};

/// One ConvLSTM step without peepholes. weight: (4*Ch, Cx+Ch, k, k) with gate
/// blocks in order input, forget, output, candidate; bias: (1, 4*Ch, 1, 1).
/// Padding is k/2 so maps keep their size (k must be odd).
///   i, f, o = sigmoid(.), g = tanh(.), c' = f*c + i*g, h' = o*tanh(c')
ConvLstmState convlstm_cell(const Tensor4& x, const ConvLstmState& state, const Tensor4& weight,
                            const Tensor4& bias, ConvLstmStepTrace* trace);

struct ConvLstmCellGrad {
  Tensor4 dx;
  Tensor4 dh_prev;
  Tensor4 dc_prev;
};

/// Gradients w.r.t. x and the previous state given d loss / d h' and
/// d loss / d c'. Accumulates into weight.grad() and bias.grad().
ConvLstmCellGrad convlstm_cell_backward(const ConvLstmStepTrace& trace, Tensor4& weight,
                                        Tensor4& bias, const Tensor4& dh, const Tensor4& dc);

/// Runs the cell over a timeline from a zero state. Returns h for every step
/// as (N*T, Ch, H, W), n-major.
struct ConvLstmSequenceTrace {
  int batch = 0;
  int time_steps = 0;
  std::vector<ConvLstmStepTrace> steps;
};
Tensor4 convlstm_sequence(const TimelineBatch& seq, const Tensor4& weight, const Tensor4& bias,
                          ConvLstmSequenceTrace* trace);
/// `dh_all` is d loss / d output of `convlstm_sequence`; returns d loss / d input.
Tensor4 convlstm_sequence_backward(const ConvLstmSequenceTrace& trace, Tensor4& weight, Tensor4& bias,
                                   const Tensor4& dh_all);

/// Timeline -> ConvLSTM -> (N*T, Ch*H*W) -> two fc layers -> (N*T, L) logits,
/// n-major rows.
struct ConvLstmHeadTrace {
  ConvLstmSequenceTrace sequence;
  Shape4 hidden_shape;
  FcHead::Trace fc;
};
Matrix convlstm_head(const TimelineBatch& seq, const Tensor4& weight, const Tensor4& bias,
                     const FcHead& head, ConvLstmHeadTrace* trace);
/// Returns d loss / d seq.data.
Tensor4 convlstm_head_backward(const ConvLstmHeadTrace& trace, Tensor4& weight, Tensor4& bias,
                               FcHead& head, const Matrix& dlogits);

/// Concatenates along channels. Shapes must agree except for c.
Tensor4 concat_channels(const Tensor4& a, const Tensor4& b);
/// Splits a channel gradient back into its `a_channels` and remaining parts.
std::pair<Tensor4, Tensor4> split_channels(const Tensor4& t, int a_channels);

/// concat(rgb, flow) along channels, then a 1x1 conv back to C channels.
/// weight: (C, 2C, 1, 1); bias: (1, C, 1, 1) or null.
Tensor4 two_stream_fuse(const Tensor4& rgb, const Tensor4& flow, const Tensor4& weight, const Tensor4* bias);
struct FuseGrad {
  Tensor4 drgb;
  Tensor4 dflow;
};
FuseGrad two_stream_fuse_backward(const Tensor4& rgb, const Tensor4& flow, Tensor4& weight, Tensor4* bias,
                                  const Tensor4& dy);
/// Fusion weight that passes the RGB stream through and ignores the flow.
Tensor4 rgb_passthrough_weight(int channels);

}  // namespace aurk
