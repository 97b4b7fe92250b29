#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aurk/dynamic.hpp"
#include "aurk/error.hpp"
#include "aurk/trainer.hpp"
#include "support/grad_check.hpp"
#include "support/grad_suites.hpp"

namespace aurk {
namespace {

using testing::random_tensor;

TEST(Timeline, SkipFourTenStepsPicksEveryFifthFrame) {
  const TimelineSpec spec{10, 4};
  EXPECT_EQ(spec.span(), 46);
  EXPECT_EQ(timeline_frames(0, spec), (std::vector<int>{0, 5, 10, 15, 20, 25, 30, 35, 40, 45}));
  EXPECT_EQ(window_starts(46, spec), (std::vector<int>{0}));
}

TEST(Timeline, NoSkip) {
  EXPECT_EQ(timeline_frames(0, TimelineSpec{3, 0}), (std::vector<int>{0, 1, 2}));
}

TEST(Timeline, ShortVideoThrows) {
  EXPECT_THROW(window_starts(40, TimelineSpec{10, 4}), InsufficientFramesError);
}

TEST(Timeline, DefaultWindowsDoNotOverlap) {
  EXPECT_EQ(window_starts(150, TimelineSpec{10, 4}), (std::vector<int>{0, 50, 100}));
  EXPECT_EQ(window_starts(50, TimelineSpec{10, 4}, 2), (std::vector<int>{0, 2, 4}));
}

TEST(Timeline, SelectionIsArithmeticProgression) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const TimelineSpec spec{1 + static_cast<int>(rng() % 12), static_cast<int>(rng() % 7)};
    const int start = static_cast<int>(rng() % 50);
    const auto frames = timeline_frames(start, spec);
    ASSERT_EQ(static_cast<int>(frames.size()), spec.time_steps);
    EXPECT_EQ(frames.front(), start);
    for (std::size_t t = 1; t < frames.size(); ++t) EXPECT_EQ(frames[t] - frames[t - 1], spec.skip + 1);
    EXPECT_EQ(frames.back() - start + 1, spec.span());
  }
}

TEST(Timeline, EachSlotConnectsOnlyToItself) {
  const std::vector<BoxSlot> slots{{1, BoxSide::left}, {1, BoxSide::right}, {2, BoxSide::whole}};
  std::vector<Tensor4> frames;
  for (int f = 0; f < 12; ++f) {
    Tensor4 t({3, 1, 1, 2});
    for (int r = 0; r < 3; ++r) {
      t.at(r, 0, 0, 0) = f;
      t.at(r, 0, 0, 1) = r;
    }
    frames.push_back(t);
  }
  const TimelineSpec spec{3, 1};
  const std::vector<int> starts{0, 6};
  const auto lines = build_timelines(frames, slots, starts, spec);
  ASSERT_EQ(lines.size(), 3u);
  for (int r = 0; r < 3; ++r) {
    const TimelineBatch& tb = lines[static_cast<std::size_t>(r)];
    EXPECT_EQ(tb.slot.group_id, slots[static_cast<std::size_t>(r)].group_id);
    ASSERT_EQ(tb.data.shape(), (Shape4{6, 1, 1, 2}));
    for (int n = 0; n < 2; ++n)
      for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(tb.data.at(n * 3 + t, 0, 0, 0), starts[static_cast<std::size_t>(n)] + 2 * t);
        EXPECT_EQ(tb.data.at(n * 3 + t, 0, 0, 1), r);
      }
  }
}

TEST(ConvLstm, ZeroWeightsKeepZeroState) {
  std::mt19937_64 rng(2);
  const Tensor4 x = random_tensor({2, 3, 4, 5}, rng);
  const ConvLstmState s = convlstm_cell(x, zero_state(2, 4, 4, 5), Tensor4({16, 7, 3, 3}), Tensor4({1, 16, 1, 1}), nullptr);
  for (double v : s.h.values()) EXPECT_EQ(v, 0.0);
  for (double v : s.c.values()) EXPECT_EQ(v, 0.0);
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

TEST(ConvLstm, OneByOneMapIsAScalarLstm) {
  std::mt19937_64 rng(3);
  const int cx = 3, ch = 2;
  const Tensor4 w = random_tensor({4 * ch, cx + ch, 3, 3}, rng);
  const Tensor4 b = random_tensor({1, 4 * ch, 1, 1}, rng);
  ConvLstmState s = zero_state(1, ch, 1, 1);
  std::vector<double> h(ch, 0.0), c(ch, 0.0);
  for (int step = 0; step < 5; ++step) {
    const Tensor4 x = random_tensor({1, cx, 1, 1}, rng);
    std::vector<double> xh(x.values().begin(), x.values().end());
    xh.insert(xh.end(), h.begin(), h.end());
    auto gate = [&](int row) {
      double z = b.values()[static_cast<std::size_t>(row)];
      for (int j = 0; j < cx + ch; ++j) z += w.at(row, j, 1, 1) * xh[static_cast<std::size_t>(j)];
      return z;
    };
    std::vector<double> h2(ch), c2(ch);
    for (int k = 0; k < ch; ++k) {
      const double i = sig(gate(k)), f = sig(gate(ch + k)), o = sig(gate(2 * ch + k)), g = std::tanh(gate(3 * ch + k));
      c2[static_cast<std::size_t>(k)] = f * c[static_cast<std::size_t>(k)] + i * g;
      h2[static_cast<std::size_t>(k)] = o * std::tanh(c2[static_cast<std::size_t>(k)]);
    }
    h = h2;
    c = c2;
    s = convlstm_cell(x, s, w, b, nullptr);
    for (int k = 0; k < ch; ++k) {
      EXPECT_NEAR(s.h.at(0, k, 0, 0), h[static_cast<std::size_t>(k)], 1e-10);
      EXPECT_NEAR(s.c.at(0, k, 0, 0), c[static_cast<std::size_t>(k)], 1e-10);
    }
  }
}

TEST(ConvLstm, CellGradientsMatchFiniteDifferences) {
  EXPECT_LT(testing::convlstm_cell_grad_suite(25, 201).worst, 1e-4);
}

TEST(ConvLstm, ShapeMismatchThrows) {
  EXPECT_THROW(convlstm_cell(Tensor4({1, 3, 4, 4}), zero_state(1, 2, 3, 4), Tensor4({8, 5, 3, 3}),
                             Tensor4({1, 8, 1, 1}), nullptr),
               ShapeError);
  EXPECT_THROW(convlstm_cell(Tensor4({1, 3, 4, 4}), zero_state(1, 2, 4, 4), Tensor4({8, 4, 3, 3}),
                             Tensor4({1, 8, 1, 1}), nullptr),
               ShapeError);
}

struct HeadFixture {
  std::mt19937_64 rng{4};
  int cx = 2, ch = 3, hw = 2, labels = 4;
  Tensor4 w = random_tensor({4 * ch, cx + ch, 3, 3}, rng, -0.5, 0.5);
  Tensor4 b = random_tensor({1, 4 * ch, 1, 1}, rng, -0.5, 0.5);
  FcHead head{"h.", ch * hw * hw, 5, labels};

  HeadFixture() {
    head.init(rng);
    testing::fill_uniform(head.fc1_b.value.values(), rng, 0.05, 0.3);
  }
  TimelineBatch seq(int n, int t) {
    return {BoxSlot{}, n, t, random_tensor({n * t, cx, hw, hw}, rng)};
  }
};

TEST(ConvLstmHead, SingleStepIsCellPlusFc) {
  HeadFixture fx;
  const TimelineBatch seq = fx.seq(2, 1);
  const Matrix logits = convlstm_head(seq, fx.w, fx.b, fx.head, nullptr);
  const ConvLstmState s = convlstm_cell(seq.data, zero_state(2, fx.ch, fx.hw, fx.hw), fx.w, fx.b, nullptr);
  EXPECT_EQ(logits.data, fx.head.forward(flatten(s.h), nullptr).data);
}

TEST(ConvLstmHead, RowCountIsBatchTimesSteps) {
  HeadFixture fx;
  const Matrix logits = convlstm_head(fx.seq(2, 3), fx.w, fx.b, fx.head, nullptr);
  EXPECT_EQ(logits.rows, 6);
  EXPECT_EQ(logits.cols, fx.labels);
}

TEST(ConvLstmHead, ReshapeRoundTripPreservesElements) {
  std::mt19937_64 rng(5);
  const Tensor4 t = random_tensor({6, 3, 2, 2}, rng);
  const Matrix m = flatten(t);
  EXPECT_EQ(m.rows, 6);
  EXPECT_EQ(m.cols, 12);
  const Tensor4 back = unflatten(m, t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back.values()[i], t.values()[i]);
}

TEST(ConvLstmHead, BackpropThroughTimeMatchesFiniteDifferences) {
  HeadFixture fx;
  TimelineBatch seq = fx.seq(2, 3);
  ConvLstmHeadTrace trace;
  const Matrix y = convlstm_head(seq, fx.w, fx.b, fx.head, &trace);
  Matrix probe(y.rows, y.cols);
  testing::fill_uniform(probe.data, fx.rng);
  const Tensor4 dx = convlstm_head_backward(trace, fx.w, fx.b, fx.head, probe);
  auto f = [&] { return testing::dot(probe.data, convlstm_head(seq, fx.w, fx.b, fx.head, nullptr).data); };
  EXPECT_LT(testing::relative_error(dx.values(), testing::numeric_gradient(seq.data.values(), f)), 1e-4);
  EXPECT_LT(testing::relative_error(fx.w.grad(), testing::numeric_gradient(fx.w.values(), f)), 1e-4);
  EXPECT_LT(testing::relative_error(fx.b.grad(), testing::numeric_gradient(fx.b.values(), f)), 1e-4);
}

TEST(TwoStream, FusionHalvesConcatenatedChannels) {
  std::mt19937_64 rng(6);
  const int c = 2048;
  const Tensor4 rgb = random_tensor({1, c, 1, 1}, rng);
  const Tensor4 flow = random_tensor({1, c, 1, 1}, rng);
  EXPECT_EQ(concat_channels(rgb, flow).c(), 4096);
  const Tensor4 w = random_tensor({c, 2 * c, 1, 1}, rng);
  EXPECT_EQ(two_stream_fuse(rgb, flow, w, nullptr).shape(), (Shape4{1, 2048, 1, 1}));
}

TEST(TwoStream, PassThroughWeightReturnsRgb) {
  std::mt19937_64 rng(7);
  const Tensor4 rgb = random_tensor({3, 4, 2, 3}, rng);
  const Tensor4 flow = random_tensor({3, 4, 2, 3}, rng);
  const Tensor4 out = two_stream_fuse(rgb, flow, rgb_passthrough_weight(4), nullptr);
  for (std::size_t i = 0; i < rgb.size(); ++i) EXPECT_EQ(out.values()[i], rgb.values()[i]);
}

TEST(TwoStream, FusionGradientsMatchFiniteDifferences) {
  EXPECT_LT(testing::two_stream_fuse_grad_suite(25, 202).worst, 1e-4);
}

TEST(TwoStream, ShapeMismatchThrows) {
  EXPECT_THROW(two_stream_fuse(Tensor4({1, 2, 3, 3}), Tensor4({1, 2, 3, 4}), Tensor4({2, 4, 1, 1}), nullptr),
               ShapeError);
  EXPECT_THROW(two_stream_fuse(Tensor4({1, 2, 3, 3}), Tensor4({1, 2, 3, 3}), Tensor4({2, 3, 1, 1}), nullptr),
               ShapeError);
}

Dataset two_subject_video(int first_length, int second_length) {
  Dataset data;
  for (int i = 0; i < first_length + second_length; ++i) {
    Frame f;
    f.subject = i < first_length ? "A" : "B";
    f.index_in_subject = i < first_length ? i : i - first_length;
    data.frames.push_back(std::move(f));
  }
  return data;
}

RunConfig convlstm_config(bool pad_start) {
  RunConfig c;
  c.dynamic = DynamicMode::convlstm;
  c.timeline = {3, 1};
  c.pad_start = pad_start;
  return c;
}

std::vector<std::size_t> all_frames(const Dataset& data) {
  std::vector<std::size_t> out(data.frames.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

TEST(Windows, PaddedWindowsEndAtEveryFrameOfEachSubject) {
  const Dataset data = two_subject_video(12, 3);
  const auto units = make_units(data, all_frames(data), convlstm_config(true), 1);
  ASSERT_EQ(units.size(), 15u);
  for (std::size_t k = 0; k < units.size(); ++k) {
    const auto& f = units[k].frames;
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f.back(), k);
    for (std::size_t t = 1; t < f.size(); ++t) {
      EXPECT_LE(f[t - 1], f[t]);
      EXPECT_EQ(data.frames[f[t]].subject, data.frames[f.back()].subject);
    }
  }
  EXPECT_EQ(units[1].frames, (std::vector<std::size_t>{0, 0, 1}));
  EXPECT_EQ(units[14].frames, (std::vector<std::size_t>{12, 12, 14}));
  EXPECT_EQ(units[11].frames, (std::vector<std::size_t>{7, 9, 11}));
}

TEST(Windows, PaddedWindowStrideCountsFromTheFirstFrame) {
  const Dataset data = two_subject_video(12, 3);
  const auto units = make_units(data, all_frames(data), convlstm_config(true), 3);
  std::vector<std::size_t> ends;
  for (const auto& u : units) ends.push_back(u.frames.back());
  EXPECT_EQ(ends, (std::vector<std::size_t>{0, 3, 6, 9, 12}));
}

TEST(Windows, UnpaddedWindowsSkipShortSubjects) {
  const Dataset data = two_subject_video(12, 3);
  const auto units = make_units(data, all_frames(data), convlstm_config(false), 1);
  ASSERT_EQ(units.size(), 8u);
  EXPECT_EQ(units.front().frames, (std::vector<std::size_t>{0, 2, 4}));
  const Dataset short_only = two_subject_video(4, 3);
  EXPECT_THROW(make_units(short_only, all_frames(short_only), convlstm_config(false), 1), InsufficientFramesError);
}

}  // namespace
}  // namespace aurk
