#include <gtest/gtest.h>

#include <random>

#include "aurk/error.hpp"
#include "aurk/metrics.hpp"
#include "support/oracles.hpp"

namespace aurk {
namespace {

std::vector<ImageLabel> column(std::initializer_list<int> bits) {
  std::vector<ImageLabel> out;
  for (int b : bits) out.emplace_back(std::vector<std::uint8_t>{static_cast<std::uint8_t>(b)});
  return out;
}

std::vector<ImageLabel> random_labels(std::size_t frames, std::size_t l, double rate, std::mt19937_64& rng) {
  std::bernoulli_distribution on(rate);
  std::vector<ImageLabel> out;
  for (std::size_t i = 0; i < frames; ++i) {
    ImageLabel x(l);
    for (auto& b : x.bits) b = on(rng) ? 1 : 0;
    out.push_back(std::move(x));
  }
  return out;
}

TEST(F1, DirectFormulaExample) {
  const std::vector<int> aus{12};
  const EvalReport r = f1_per_au(column({1, 1, 0}), column({1, 0, 0}), aus);
  EXPECT_DOUBLE_EQ(r.per_au[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(r.per_au[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.per_au[0].f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.avg_f1, 2.0 / 3.0);
}

TEST(F1, PerfectPredictionsScoreOne) {
  std::mt19937_64 rng(1);
  const auto truth = random_labels(50, 5, 0.4, rng);
  const std::vector<int> aus{1, 2, 4, 6, 7};
  const EvalReport r = f1_per_au(truth, truth, aus);
  for (const AuScore& s : r.per_au) EXPECT_EQ(s.f1, 1.0);
  EXPECT_EQ(r.avg_f1, 1.0);
}

TEST(F1, ZeroDenominatorsScoreZero) {
  const std::vector<int> aus{1};
  EXPECT_EQ(f1_per_au(column({0, 0}), column({0, 0}), aus).per_au[0].f1, 0.0);
  EXPECT_EQ(f1_per_au(column({1, 1}), column({0, 0}), aus).per_au[0].f1, 0.0);
  EXPECT_EQ(f1_per_au(column({0, 0}), column({1, 0}), aus).per_au[0].f1, 0.0);
}

TEST(F1, LengthMismatchThrows) {
  const std::vector<int> aus{1};
  EXPECT_THROW(f1_per_au(column({1, 0}), column({1}), aus), ShapeError);
}

TEST(F1, MatchesConfusionCountOracle) {
  std::mt19937_64 rng(2);
  const std::size_t l = 12;
  const auto preds = random_labels(10000, l, 0.3, rng);
  const auto truth = random_labels(10000, l, 0.25, rng);
  std::vector<int> aus(l);
  for (std::size_t j = 0; j < l; ++j) aus[j] = static_cast<int>(j + 1);
  const EvalReport r = f1_per_au(preds, truth, aus);
  double sum = 0.0;
  for (std::size_t j = 0; j < l; ++j) {
    const double expect = testing::naive_f1(preds, truth, j);
    EXPECT_NEAR(r.per_au[j].f1, expect, 1e-12);
    sum += expect;
  }
  EXPECT_NEAR(r.avg_f1, sum / l, 1e-12);
}

TEST(F1, PermutationAndDuplicationInvariant) {
  std::mt19937_64 rng(3);
  auto preds = random_labels(300, 4, 0.5, rng);
  auto truth = random_labels(300, 4, 0.5, rng);
  const std::vector<int> aus{1, 2, 3, 4};
  const EvalReport base = f1_per_au(preds, truth, aus);
  std::vector<std::size_t> order(preds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<ImageLabel> p2, t2;
  for (std::size_t i : order) {
    p2.push_back(preds[i]);
    t2.push_back(truth[i]);
  }
  const EvalReport shuffled = f1_per_au(p2, t2, aus);
  p2.insert(p2.end(), preds.begin(), preds.end());
  t2.insert(t2.end(), truth.begin(), truth.end());
  const EvalReport doubled = f1_per_au(p2, t2, aus);
  for (std::size_t j = 0; j < aus.size(); ++j) {
    EXPECT_EQ(shuffled.per_au[j].f1, base.per_au[j].f1);
    EXPECT_EQ(doubled.per_au[j].f1, base.per_au[j].f1);
  }
}

TEST(F1, MergedPartialsEqualOneStream) {
  std::mt19937_64 rng(4);
  const auto preds = random_labels(100, 3, 0.5, rng);
  const auto truth = random_labels(100, 3, 0.5, rng);
  F1Accumulator whole({1, 2, 3}), a({1, 2, 3}), b({1, 2, 3});
  for (std::size_t i = 0; i < 100; ++i) {
    whole.add(preds[i], truth[i]);
    (i < 37 ? a : b).add(preds[i], truth[i]);
  }
  a.merge(b);
  EXPECT_EQ(a.report().avg_f1, whole.report().avg_f1);
  EXPECT_EQ(a.frames(), 100u);
}

TEST(F1, LabelFilesMustAlign) {
  LabelFile p{{1}, {{"a", ImageLabel(std::vector<std::uint8_t>{1})}, {"b", ImageLabel(std::vector<std::uint8_t>{0})}}};
  LabelFile t = p;
  EXPECT_EQ(evaluate_label_files(p, t).avg_f1, 1.0);
  t.records[1].frame_id = "c";
  try {
    evaluate_label_files(p, t);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
}

TEST(Duration, RunLengthExample) {
  const std::vector<std::uint8_t> seq{0, 1, 1, 1, 0, 1, 0};
  const DurationStat s = duration_segments(seq);
  EXPECT_EQ(s.segments, 2u);
  EXPECT_EQ(s.avg_duration, 2.0);
}

TEST(Duration, AllOnesAndAllZeros) {
  const DurationStat ones = duration_segments(std::vector<std::uint8_t>(50, 1));
  EXPECT_EQ(ones.segments, 1u);
  EXPECT_EQ(ones.avg_duration, 50.0);
  const DurationStat zeros = duration_segments(std::vector<std::uint8_t>(50, 0));
  EXPECT_EQ(zeros.segments, 0u);
  EXPECT_EQ(zeros.avg_duration, 0.0);
}

TEST(Duration, MatchesRunLengthOracle) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::uint8_t> seq(1 + rng() % 200);
    const double p = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    std::bernoulli_distribution on(p);
    for (auto& v : seq) v = on(rng) ? 1 : 0;
    const auto [count, avg] = testing::rle_durations(seq);
    const DurationStat s = duration_segments(seq);
    ASSERT_EQ(s.segments, count);
    ASSERT_NEAR(s.avg_duration, avg, 1e-12);
  }
}

TEST(Duration, SplittingARunAddsOneSegment) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 200; ++k) {
    std::vector<std::uint8_t> seq(20 + rng() % 50);
    for (auto& v : seq) v = rng() % 3 ? 1 : 0;
    const DurationStat s = duration_segments(seq);
    std::size_t ones = 0;
    for (auto v : seq) ones += v;
    EXPECT_EQ(s.active_frames, ones);
    for (std::size_t i = 1; i + 1 < seq.size(); ++i)
      if (seq[i - 1] && seq[i]) {
        auto split = seq;
        split.insert(split.begin() + static_cast<std::ptrdiff_t>(i), 0);
        EXPECT_EQ(duration_segments(split).segments, s.segments + 1);
        break;
      }
  }
}

TEST(Duration, SubjectsAreSeparateVideos) {
  LabelFile f{{5}, {}};
  for (const char* id : {"S1/0", "S1/1", "S2/0", "S2/1"})
    f.records.push_back({id, ImageLabel(std::vector<std::uint8_t>{1})});
  const auto stats = duration_stats(f);
  EXPECT_EQ(stats[0].stat.segments, 2u);
  EXPECT_EQ(stats[0].stat.avg_duration, 2.0);
}

TEST(Correlation, IdenticalAndNegatedSeries) {
  const std::vector<double> a{1, 4, 2, 8, 5};
  std::vector<double> neg;
  for (double v : a) neg.push_back(-v);
  EXPECT_NEAR(pearson(a, a), 1.0, 1e-15);
  EXPECT_NEAR(pearson(a, neg), -1.0, 1e-15);
}

TEST(Correlation, MatchesCovarianceFormula) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> a(12), b(12);
    for (auto& v : a) v = d(rng);
    for (auto& v : b) v = d(rng);
    EXPECT_NEAR(pearson(a, b), testing::covariance_pearson(a, b), 1e-12);
  }
}

TEST(Correlation, TooFewAusThrows) {
  const std::vector<double> a{1, 2};
  EXPECT_THROW(pearson(a, a), InsufficientDataError);
  const std::vector<int> aus{1, 2};
  EXPECT_THROW(correlation_report(aus, a, a), InsufficientDataError);
}

TEST(Correlation, ReportScalesDurationAndRenders) {
  const std::vector<int> aus{1, 2, 4};
  const std::vector<double> imp{0.01, 0.03, 0.02};
  const std::vector<double> dur{60, 180, 120};
  const CorrelationReport r = correlation_report(aus, imp, dur);
  EXPECT_EQ(r.scaled_duration, (std::vector<double>{1, 3, 2}));
  EXPECT_NEAR(r.r, 1.0, 1e-12);
  const std::string csv = format_correlation_csv(r);
  EXPECT_NE(csv.find("AU4,0.02,2\n"), std::string::npos);
  EXPECT_NE(render_correlation_svg(r).find("<polyline"), std::string::npos);
}

TEST(Reports, EvalCsvHasAuRowsMethodColumnsAndAvg) {
  const std::vector<int> aus{1, 2};
  std::vector<ImageLabel> p{ImageLabel(std::vector<std::uint8_t>{1, 0})};
  std::vector<ImageLabel> t{ImageLabel(std::vector<std::uint8_t>{1, 1})};
  const std::vector<std::pair<std::string, EvalReport>> methods{{"static", f1_per_au(p, t, aus)},
                                                                {"oracle", f1_per_au(t, t, aus)}};
  EXPECT_EQ(format_eval_csv(methods), "AU,static,oracle\n1,100.0,100.0\n2,0.0,100.0\nAvg,50.0,100.0\n");
  const std::string json = format_eval_json("static", methods[0].second);
  EXPECT_NE(json.find("\"avg_f1\": 0.5"), std::string::npos);
}

}  // namespace
}  // namespace aurk
