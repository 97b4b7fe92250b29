#include "aurk/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aurk/error.hpp"
#include "aurk/loss.hpp"

namespace aurk {

std::vector<int> timeline_frames(int start, const TimelineSpec& spec) {
  std::vector<int> out(static_cast<std::size_t>(spec.time_steps));
  for (int t = 0; t < spec.time_steps; ++t) out[static_cast<std::size_t>(t)] = start + t * spec.stride();
  return out;
}

std::vector<int> window_starts(int length, const TimelineSpec& spec, int window_stride) {
  if (spec.time_steps < 1 || spec.skip < 0) throw ShapeError("timeline needs T >= 1 and skip >= 0");
  if (window_stride < 0) throw ShapeError("window stride must be >= 0");
  if (length < spec.span())
    throw InsufficientFramesError("video has " + std::to_string(length) + " frames, a window needs " +
                                  std::to_string(spec.span()));
  const int step = window_stride == 0 ? spec.time_steps * spec.stride() : window_stride;
  std::vector<int> out;
  for (int s = 0; s + spec.span() <= length; s += step) out.push_back(s);
  return out;
}

std::vector<TimelineBatch> build_timelines(std::span<const Tensor4> frame_features,
                                           std::span<const BoxSlot> slots,
                                           std::span<const int> window_starts_,
                                           const TimelineSpec& spec) {
  if (frame_features.empty()) throw InsufficientFramesError("no frames");
  const Shape4 fs = frame_features.front().shape();
  if (fs.n != static_cast<int>(slots.size()))
    throw ShapeError("frame features have " + std::to_string(fs.n) + " RoIs, table has " +
                     std::to_string(slots.size()) + " slots");
  for (const Tensor4& f : frame_features)
    if (!(f.shape() == fs)) throw ShapeError("frame feature shapes differ");
  const int length = static_cast<int>(frame_features.size());
  const int n = static_cast<int>(window_starts_.size());
  const std::size_t plane = static_cast<std::size_t>(fs.c) * static_cast<std::size_t>(fs.h) *
                            static_cast<std::size_t>(fs.w);
  std::vector<TimelineBatch> out;
  for (std::size_t r = 0; r < slots.size(); ++r) {
    TimelineBatch tb{slots[r], n, spec.time_steps, Tensor4({n * spec.time_steps, fs.c, fs.h, fs.w})};
    auto dst = tb.data.values();
    for (int b = 0; b < n; ++b) {
      const auto frames = timeline_frames(window_starts_[static_cast<std::size_t>(b)], spec);
      for (int t = 0; t < spec.time_steps; ++t) {
        const int f = frames[static_cast<std::size_t>(t)];
        if (f < 0 || f >= length)
          throw InsufficientFramesError("window reaches frame " + std::to_string(f) + " of a " +
                                        std::to_string(length) + "-frame video");
        const auto src = frame_features[static_cast<std::size_t>(f)].values().subspan(r * plane, plane);
        std::copy(src.begin(), src.end(),
                  dst.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(b * spec.time_steps + t) * plane));
      }
    }
    out.push_back(std::move(tb));
  }
  return out;
}

ConvLstmState zero_state(int n, int channels, int height, int width) {
  return {Tensor4({n, channels, height, width}), Tensor4({n, channels, height, width})};
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
    throw ShapeError("cannot concatenate " + a.shape().str() + " and " + b.shape().str());
  Tensor4 out({a.n(), a.c() + b.c(), a.h(), a.w()});
  const std::size_t pa = static_cast<std::size_t>(a.c()) * a.h() * a.w();
  const std::size_t pb = static_cast<std::size_t>(b.c()) * b.h() * b.w();
  auto ov = out.values();
  for (int n = 0; n < a.n(); ++n) {
    const auto sa = a.values().subspan(static_cast<std::size_t>(n) * pa, pa);
    const auto sb = b.values().subspan(static_cast<std::size_t>(n) * pb, pb);
    auto dst = ov.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(n) * (pa + pb));
    std::copy(sa.begin(), sa.end(), dst);
    std::copy(sb.begin(), sb.end(), dst + static_cast<std::ptrdiff_t>(pa));
  }
  return out;
}

std::pair<Tensor4, Tensor4> split_channels(const Tensor4& t, int a_channels) {
  if (a_channels < 0 || a_channels > t.c()) throw ShapeError("channel split out of range");
  Tensor4 a({t.n(), a_channels, t.h(), t.w()});
  Tensor4 b({t.n(), t.c() - a_channels, t.h(), t.w()});
  const std::size_t pa = a.size() / static_cast<std::size_t>(std::max(t.n(), 1));
  const std::size_t pb = b.size() / static_cast<std::size_t>(std::max(t.n(), 1));
  const auto tv = t.values();
  for (int n = 0; n < t.n(); ++n) {
    const auto src = tv.subspan(static_cast<std::size_t>(n) * (pa + pb), pa + pb);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(pa),
              a.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(n) * pa));
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(pa), src.end(),
              b.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(n) * pb));
  }
  return {std::move(a), std::move(b)};
}

namespace {

void check_cell_shapes(const Tensor4& x, const ConvLstmState& s, const Tensor4& weight, const Tensor4& bias) {
  if (!(s.h.shape() == s.c.shape())) throw ShapeError("ConvLSTM h and c shapes differ");
  if (x.n() != s.h.n() || x.h() != s.h.h() || x.w() != s.h.w())
    throw ShapeError("ConvLSTM input " + x.shape().str() + " does not match state " + s.h.shape().str());
  const int ch = s.h.c();
  if (weight.n() != 4 * ch || weight.c() != x.c() + ch)
    throw ShapeError("ConvLSTM weight " + weight.shape().str() + " does not fit input " +
                     std::to_string(x.c()) + " and hidden " + std::to_string(ch) + " channels");
  if (weight.h() != weight.w() || weight.h() % 2 == 0) throw ShapeError("ConvLSTM kernel must be square and odd");
  if (bias.size() != static_cast<std::size_t>(4 * ch)) throw ShapeError("ConvLSTM bias size mismatch");
}

}  // namespace

ConvLstmState convlstm_cell(const Tensor4& x, const ConvLstmState& state, const Tensor4& weight,
                            const Tensor4& bias, ConvLstmStepTrace* trace) {
  check_cell_shapes(x, state, weight, bias);
  const int ch = state.h.c();
  Tensor4 xh = concat_channels(x, state.h);
  const Tensor4 z = conv2d(xh, weight, &bias, 1, weight.h() / 2);
  const Shape4 hs = state.h.shape();
  Tensor4 i(hs), f(hs), o(hs), g(hs), c(hs), tanh_c(hs), h(hs);
  for (int n = 0; n < hs.n; ++n)
    for (int k = 0; k < ch; ++k)
      for (int y = 0; y < hs.h; ++y)
        for (int xx = 0; xx < hs.w; ++xx) {
          const double ig = sigmoid(z.at(n, k, y, xx));
          const double fg = sigmoid(z.at(n, ch + k, y, xx));
          const double og = sigmoid(z.at(n, 2 * ch + k, y, xx));
          const double gg = std::tanh(z.at(n, 3 * ch + k, y, xx));
          const double cn = fg * state.c.at(n, k, y, xx) + ig * gg;
          const double tc = std::tanh(cn);
          i.at(n, k, y, xx) = ig;
          f.at(n, k, y, xx) = fg;
          o.at(n, k, y, xx) = og;
          g.at(n, k, y, xx) = gg;
          c.at(n, k, y, xx) = cn;
          tanh_c.at(n, k, y, xx) = tc;
          h.at(n, k, y, xx) = og * tc;
        }
  if (trace) {
    trace->xh = std::move(xh);
    trace->i = std::move(i);
    trace->f = std::move(f);
    trace->o = std::move(o);
    trace->g = std::move(g);
    trace->c_prev = state.c;
    trace->tanh_c = std::move(tanh_c);
  }
  return {std::move(h), std::move(c)};
}

ConvLstmCellGrad convlstm_cell_backward(const ConvLstmStepTrace& trace, Tensor4& weight, Tensor4& bias,
                                        const Tensor4& dh, const Tensor4& dc) {
  const Shape4 hs = trace.i.shape();
  if (!(dh.shape() == hs) || !(dc.shape() == hs)) throw ShapeError("ConvLSTM state gradient shape mismatch");
  const int ch = hs.c;
  Tensor4 dz({hs.n, 4 * ch, hs.h, hs.w});
  Tensor4 dc_prev(hs);
  for (int n = 0; n < hs.n; ++n)
    for (int k = 0; k < ch; ++k)
      for (int y = 0; y < hs.h; ++y)
        for (int x = 0; x < hs.w; ++x) {
          const double ig = trace.i.at(n, k, y, x);
          const double fg = trace.f.at(n, k, y, x);
          const double og = trace.o.at(n, k, y, x);
          const double gg = trace.g.at(n, k, y, x);
          const double tc = trace.tanh_c.at(n, k, y, x);
          const double dhv = dh.at(n, k, y, x);
          const double dcv = dc.at(n, k, y, x) + dhv * og * (1.0 - tc * tc);
          dz.at(n, k, y, x) = dcv * gg * ig * (1.0 - ig);
          dz.at(n, ch + k, y, x) = dcv * trace.c_prev.at(n, k, y, x) * fg * (1.0 - fg);
          dz.at(n, 2 * ch + k, y, x) = dhv * tc * og * (1.0 - og);
          dz.at(n, 3 * ch + k, y, x) = dcv * ig * (1.0 - gg * gg);
          dc_prev.at(n, k, y, x) = dcv * fg;
        }
  const Tensor4 dxh = conv2d_backward(trace.xh, weight, &bias, 1, weight.h() / 2, dz);
  auto [dx, dh_prev] = split_channels(dxh, trace.xh.c() - ch);
  return {std::move(dx), std::move(dh_prev), std::move(dc_prev)};
}

namespace {

// Rows n*T + t of `all` for a fixed t, as an (N, C, H, W) tensor.
Tensor4 gather_step(const Tensor4& all, int batch, int time_steps, int t) {
  Tensor4 out({batch, all.c(), all.h(), all.w()});
  const std::size_t plane = out.size() / static_cast<std::size_t>(std::max(batch, 1));
  for (int n = 0; n < batch; ++n) {
    const auto src = all.values().subspan(static_cast<std::size_t>(n * time_steps + t) * plane, plane);
    std::copy(src.begin(), src.end(), out.values().begin() + static_cast<std::ptrdiff_t>(n * plane));
  }
  return out;
}

void scatter_step(Tensor4& all, const Tensor4& step, int time_steps, int t) {
  const std::size_t plane = step.size() / static_cast<std::size_t>(std::max(step.n(), 1));
  for (int n = 0; n < step.n(); ++n) {
    const auto src = step.values().subspan(static_cast<std::size_t>(n) * plane, plane);
    std::copy(src.begin(), src.end(),
              all.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(n * time_steps + t) * plane));
  }
}

}  // namespace

Tensor4 convlstm_sequence(const TimelineBatch& seq, const Tensor4& weight, const Tensor4& bias,
                          ConvLstmSequenceTrace* trace) {
  if (seq.data.n() != seq.batch * seq.time_steps)
    throw ShapeError("timeline holds " + std::to_string(seq.data.n()) + " rows, expected N*T = " +
                     std::to_string(seq.batch * seq.time_steps));
  const int ch = weight.n() / 4;
  ConvLstmState state = zero_state(seq.batch, ch, seq.data.h(), seq.data.w());
  Tensor4 out({seq.data.n(), ch, seq.data.h(), seq.data.w()});
  if (trace) {
    trace->batch = seq.batch;
    trace->time_steps = seq.time_steps;
    trace->steps.assign(static_cast<std::size_t>(seq.time_steps), {});
  }
  for (int t = 0; t < seq.time_steps; ++t) {
    const Tensor4 x = gather_step(seq.data, seq.batch, seq.time_steps, t);
    state = convlstm_cell(x, state, weight, bias, trace ? &trace->steps[static_cast<std::size_t>(t)] : nullptr);
    scatter_step(out, state.h, seq.time_steps, t);
  }
  return out;
}

Tensor4 convlstm_sequence_backward(const ConvLstmSequenceTrace& trace, Tensor4& weight, Tensor4& bias,
                                   const Tensor4& dh_all) {
  const int steps = trace.time_steps;
  if (steps < 1 || trace.steps.size() != static_cast<std::size_t>(steps))
    throw ShapeError("sequence trace is empty");
  const Shape4 hs = trace.steps.front().i.shape();
  const int cx = trace.steps.front().xh.c() - hs.c;
  Tensor4 dx_all({trace.batch * steps, cx, hs.h, hs.w});
  Tensor4 dh_next(hs), dc_next(hs);
  for (int t = steps - 1; t >= 0; --t) {
    Tensor4 dh = gather_step(dh_all, trace.batch, steps, t);
    for (std::size_t k = 0; k < dh.size(); ++k) dh.values()[k] += dh_next.values()[k];
    ConvLstmCellGrad g =
        convlstm_cell_backward(trace.steps[static_cast<std::size_t>(t)], weight, bias, dh, dc_next);
    scatter_step(dx_all, g.dx, steps, t);
    dh_next = std::move(g.dh_prev);
    dc_next = std::move(g.dc_prev);
  }
  return dx_all;
}

Matrix convlstm_head(const TimelineBatch& seq, const Tensor4& weight, const Tensor4& bias, const FcHead& head,
                     ConvLstmHeadTrace* trace) {
  const Tensor4 hidden = convlstm_sequence(seq, weight, bias, trace ? &trace->sequence : nullptr);
  if (trace) trace->hidden_shape = hidden.shape();
  return head.forward(flatten(hidden), trace ? &trace->fc : nullptr);
}

Tensor4 convlstm_head_backward(const ConvLstmHeadTrace& trace, Tensor4& weight, Tensor4& bias, FcHead& head,
                               const Matrix& dlogits) {
  const Matrix dflat = head.backward(trace.fc, dlogits);
  return convlstm_sequence_backward(trace.sequence, weight, bias, unflatten(dflat, trace.hidden_shape));
}

namespace {

void check_fuse_shapes(const Tensor4& rgb, const Tensor4& flow, const Tensor4& weight) {
  if (!(rgb.shape() == flow.shape()))
    throw ShapeError("RGB features " + rgb.shape().str() + " and flow features " + flow.shape().str() +
                     " differ");
  if (!(weight.shape() == Shape4{rgb.c(), 2 * rgb.c(), 1, 1}))
    throw ShapeError("fusion weight " + weight.shape().str() + " does not map " + std::to_string(2 * rgb.c()) +
                     " to " + std::to_string(rgb.c()) + " channels");
}

}  // namespace

Tensor4 two_stream_fuse(const Tensor4& rgb, const Tensor4& flow, const Tensor4& weight, const Tensor4* bias) {
  check_fuse_shapes(rgb, flow, weight);
  return conv2d(concat_channels(rgb, flow), weight, bias, 1, 0);
}

FuseGrad two_stream_fuse_backward(const Tensor4& rgb, const Tensor4& flow, Tensor4& weight, Tensor4* bias,
                                  const Tensor4& dy) {
  check_fuse_shapes(rgb, flow, weight);
  const Tensor4 dcat = conv2d_backward(concat_channels(rgb, flow), weight, bias, 1, 0, dy);
  auto [drgb, dflow] = split_channels(dcat, rgb.c());
  return {std::move(drgb), std::move(dflow)};
}

Tensor4 rgb_passthrough_weight(int channels) {
  Tensor4 w({channels, 2 * channels, 1, 1});
  for (int c = 0; c < channels; ++c) w.at(c, c, 0, 0) = 1.0;
  return w;
}

}  // namespace aurk
