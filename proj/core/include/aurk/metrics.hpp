#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aurk/labels.hpp"

namespace aurk {

struct AuCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};

struct AuScore {
  int au = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  AuCounts counts;
};

/// Frame-based scores. `avg_f1` is the unweighted mean over every configured AU.
struct EvalReport {
  std::vector<AuScore> per_au;
  double avg_f1 = 0.0;
};

/// P = TP/(TP+FP), R = TP/(TP+FN); a zero denominator makes that ratio 0 and
/// F1 is 0 when P + R = 0.
AuScore score_counts(int au, const AuCounts& counts);

/// Streaming confusion counts. Partial accumulators merge by addition.
class F1Accumulator {
 public:
  explicit F1Accumulator(std::vector<int> au_numbers);
  /// Throws ShapeError when either label has the wrong length.
  void add(const ImageLabel& pred, const ImageLabel& truth);
  void merge(const F1Accumulator& other);
  EvalReport report() const;
  std::size_t frames() const noexcept { return frames_; }

 private:
  std::vector<int> aus_;
  std::vector<AuCounts> counts_;
  std::size_t frames_ = 0;
};

/// Throws ShapeError when the streams differ in length.
EvalReport f1_per_au(std::span<const ImageLabel> preds, std::span<const ImageLabel> truths,
                     std::span<const int> au_numbers);

/// Aligns two label files by frame id and scores them. Throws ShapeError
/// naming the first frame that is missing or out of order.
EvalReport evaluate_label_files(const LabelFile& predictions, const LabelFile& truth);

struct DurationStat {
  double avg_duration = 0.0;  // frames per segment
  std::size_t segments = 0;
  std::size_t active_frames = 0;
};

/// Segments are maximal runs of 1s; avg_duration = active frames / segments,
/// (0, 0) for a sequence without 1s.
DurationStat duration_segments(std::span<const std::uint8_t> timeline);

/// Sums several independent sequences (videos) of one AU.
DurationStat combine_durations(std::span<const DurationStat> parts);

struct AuDuration {
  int au = 0;
  DurationStat stat;
};

/// Per-AU duration statistics of a label file, treating each subject (frame
/// id prefix before '/') as its own video in file order.
std::vector<AuDuration> duration_stats(const LabelFile& labels);

/// Pearson correlation. Throws InsufficientDataError for fewer than 3 points
/// and NumericError when a series is constant.
double pearson(std::span<const double> a, std::span<const double> b);

struct CorrelationReport {
  std::vector<int> aus;
  std::vector<double> f1_improvement;
  std::vector<double> scaled_duration;
  double duration_scale = 1.0 / 60.0;
  double r = 0.0;
};

CorrelationReport correlation_report(std::span<const int> aus, std::span<const double> f1_improvement,
                                     std::span<const double> avg_duration, double duration_scale = 1.0 / 60.0);

/// `AU,f1_improvement,scaled_duration` rows followed by `# pearson_r,<r>`.
std::string format_correlation_csv(const CorrelationReport& report);
/// Line plot of both series over the AU axis.
std::string render_correlation_svg(const CorrelationReport& report);

/// Table layout: one row per AU, one column per method, F1 in percent with
/// one decimal, and a closing `Avg` row.
std::string format_eval_csv(std::span<const std::pair<std::string, EvalReport>> methods);
/// Full-precision summary with per-AU counts.
std::string format_eval_json(const std::string& method, const EvalReport& report);
/// Reads a summary written by format_eval_json.
EvalReport parse_eval_json(std::string_view text);

/// `AU,avg_duration,segment_count`.
std::string format_duration_csv(std::span<const AuDuration> stats);

/// Subject part of a frame id ("S03/0042" -> "S03"); the whole id if it has no '/'.
std::string subject_of(const std::string& frame_id);

}  // namespace aurk
