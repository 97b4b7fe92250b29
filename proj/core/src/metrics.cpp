#include "aurk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"

namespace aurk {

AuScore score_counts(int au, const AuCounts& c) {
  AuScore s;
  s.au = au;
  s.counts = c;
  const auto tp = static_cast<double>(c.tp);
  s.precision = c.tp + c.fp == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fp);
  s.recall = c.tp + c.fn == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

F1Accumulator::F1Accumulator(std::vector<int> au_numbers)
    : aus_(std::move(au_numbers)), counts_(aus_.size()) {}

void F1Accumulator::add(const ImageLabel& pred, const ImageLabel& truth) {
  if (pred.size() != aus_.size() || truth.size() != aus_.size())
    throw ShapeError("label lengths " + std::to_string(pred.size()) + "/" + std::to_string(truth.size()) +
                     " do not match " + std::to_string(aus_.size()) + " AUs");
  for (std::size_t j = 0; j < aus_.size(); ++j) {
    const bool p = pred.bits[j] != 0, t = truth.bits[j] != 0;
    AuCounts& c = counts_[j];
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  ++frames_;
}

void F1Accumulator::merge(const F1Accumulator& other) {
  if (other.aus_ != aus_) throw ShapeError("cannot merge accumulators over different AUs");
  for (std::size_t j = 0; j < aus_.size(); ++j) {
    counts_[j].tp += other.counts_[j].tp;
    counts_[j].fp += other.counts_[j].fp;
    counts_[j].fn += other.counts_[j].fn;
    counts_[j].tn += other.counts_[j].tn;
  }
  frames_ += other.frames_;
}

EvalReport F1Accumulator::report() const {
  EvalReport r;
  double sum = 0.0;
  for (std::size_t j = 0; j < aus_.size(); ++j) {
    r.per_au.push_back(score_counts(aus_[j], counts_[j]));
    sum += r.per_au.back().f1;
  }
  r.avg_f1 = aus_.empty() ? 0.0 : sum / static_cast<double>(aus_.size());
  return r;
}

EvalReport f1_per_au(std::span<const ImageLabel> preds, std::span<const ImageLabel> truths,
                     std::span<const int> au_numbers) {
  if (preds.size() != truths.size())
    throw ShapeError("prediction stream has " + std::to_string(preds.size()) + " frames, ground truth " +
                     std::to_string(truths.size()));
  F1Accumulator acc({au_numbers.begin(), au_numbers.end()});
  for (std::size_t i = 0; i < preds.size(); ++i) acc.add(preds[i], truths[i]);
  return acc.report();
}

EvalReport evaluate_label_files(const LabelFile& predictions, const LabelFile& truth) {
  if (predictions.au_numbers != truth.au_numbers) throw ShapeError("prediction and ground-truth AU columns differ");
  if (predictions.records.size() != truth.records.size())
    throw ShapeError("predictions have " + std::to_string(predictions.records.size()) + " frames, ground truth " +
                     std::to_string(truth.records.size()));
  F1Accumulator acc(truth.au_numbers);
  for (std::size_t i = 0; i < truth.records.size(); ++i) {
    if (predictions.records[i].frame_id != truth.records[i].frame_id)
      throw ShapeError("frame " + std::to_string(i) + ": prediction '" + predictions.records[i].frame_id +
                       "' does not align with ground truth '" + truth.records[i].frame_id + "'");
    acc.add(predictions.records[i].label, truth.records[i].label);
  }
  return acc.report();
}

DurationStat duration_segments(std::span<const std::uint8_t> timeline) {
  DurationStat s;
  bool prev = false;
  for (std::uint8_t v : timeline) {
    const bool on = v != 0;
    if (on) {
      ++s.active_frames;
      if (!prev) ++s.segments;
    }
    prev = on;
  }
  s.avg_duration = s.segments == 0 ? 0.0 : static_cast<double>(s.active_frames) / static_cast<double>(s.segments);
  return s;
}

DurationStat combine_durations(std::span<const DurationStat> parts) {
  DurationStat s;
  for (const DurationStat& p : parts) {
    s.segments += p.segments;
    s.active_frames += p.active_frames;
  }
  s.avg_duration = s.segments == 0 ? 0.0 : static_cast<double>(s.active_frames) / static_cast<double>(s.segments);
  return s;
}

std::string subject_of(const std::string& frame_id) {
  const auto slash = frame_id.find('/');
  return slash == std::string::npos ? frame_id : frame_id.substr(0, slash);
}

std::vector<AuDuration> duration_stats(const LabelFile& labels) {
  std::vector<AuDuration> out;
  for (std::size_t j = 0; j < labels.au_numbers.size(); ++j) {
    std::vector<DurationStat> parts;
    std::vector<std::uint8_t> run;
    std::string subject;
    for (const LabelRecord& rec : labels.records) {
      const std::string s = subject_of(rec.frame_id);
      if (s != subject && !run.empty()) {
        parts.push_back(duration_segments(run));
        run.clear();
      }
      subject = s;
      run.push_back(rec.label.bits[j]);
    }
    if (!run.empty()) parts.push_back(duration_segments(run));
    out.push_back({labels.au_numbers[j], combine_durations(parts)});
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("correlation series differ in length");
  if (a.size() < 3) throw InsufficientDataError("correlation needs at least 3 AUs, got " + std::to_string(a.size()));
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw NumericError("correlation of a constant series is undefined");
  return sab / std::sqrt(saa * sbb);
}

CorrelationReport correlation_report(std::span<const int> aus, std::span<const double> f1_improvement,
                                     std::span<const double> avg_duration, double duration_scale) {
  if (aus.size() != f1_improvement.size() || aus.size() != avg_duration.size())
    throw ShapeError("correlation inputs are not aligned");
  CorrelationReport r;
  r.aus.assign(aus.begin(), aus.end());
  r.f1_improvement.assign(f1_improvement.begin(), f1_improvement.end());
  r.duration_scale = duration_scale;
  for (double d : avg_duration) r.scaled_duration.push_back(d * duration_scale);
  r.r = pearson(r.f1_improvement, r.scaled_duration);
  return r;
}

std::string format_correlation_csv(const CorrelationReport& report) {
  std::string out = "AU,f1_improvement,scaled_duration\n";
  for (std::size_t i = 0; i < report.aus.size(); ++i)
    out += "AU" + std::to_string(report.aus[i]) + "," + csv::format_double(report.f1_improvement[i]) + "," +
           csv::format_double(report.scaled_duration[i]) + "\n";
  out += "# duration_scale," + csv::format_double(report.duration_scale) + "\n";
  out += "# pearson_r," + csv::format_double(report.r) + "\n";
  return out;
}

std::string render_correlation_svg(const CorrelationReport& report) {
  constexpr double width = 640, height = 360, left = 50, right = 20, top = 30, bottom = 50;
  const std::size_t n = report.aus.size();
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min({lo, report.f1_improvement[i], report.scaled_duration[i]});
    hi = std::max({hi, report.f1_improvement[i], report.scaled_duration[i]});
  }
  if (hi == lo) hi = lo + 1.0;
  auto px = [&](std::size_t i) {
    return left + (n < 2 ? 0.0 : (width - left - right) * static_cast<double>(i) / static_cast<double>(n - 1));
  };
  auto py = [&](double v) { return top + (height - top - bottom) * (hi - v) / (hi - lo); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << num(py(0.0)) << "\" x2=\"" << width - right << "\" y2=\""
    << num(py(0.0)) << "\" stroke=\"#999\"/>\n";
  auto series = [&](const std::vector<double>& v, const char* color) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) s << (i ? " " : "") << num(px(i)) << "," << num(py(v[i]));
    s << "\"/>\n";
  };
  series(report.f1_improvement, "#1f77b4");
  series(report.scaled_duration, "#d62728");
  for (std::size_t i = 0; i < n; ++i)
    s << "<text x=\"" << num(px(i)) << "\" y=\"" << height - bottom + 20
      << "\" font-size=\"11\" text-anchor=\"middle\">AU" << report.aus[i] << "</text>\n";
  s << "<text x=\"" << left << "\" y=\"18\" font-size=\"12\">F1 improvement (blue), duration x "
    << csv::format_double(report.duration_scale) << " (red), r = " << num(report.r) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

namespace {

std::string percent1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

}  // namespace

std::string format_eval_csv(std::span<const std::pair<std::string, EvalReport>> methods) {
  if (methods.empty()) return "AU\n";
  const auto& first = methods.front().second.per_au;
  for (const auto& [name, rep] : methods) {
    if (rep.per_au.size() != first.size()) throw ShapeError("method '" + name + "' covers different AUs");
    for (std::size_t j = 0; j < first.size(); ++j)
      if (rep.per_au[j].au != first[j].au) throw ShapeError("method '" + name + "' covers different AUs");
  }
  std::string out = "AU";
  for (const auto& m : methods) out += "," + m.first;
  out += "\n";
  for (std::size_t j = 0; j < first.size(); ++j) {
    out += std::to_string(first[j].au);
    for (const auto& m : methods) out += "," + percent1(m.second.per_au[j].f1);
    out += "\n";
  }
  out += "Avg";
  for (const auto& m : methods) out += "," + percent1(m.second.avg_f1);
  out += "\n";
  return out;
}

std::string format_eval_json(const std::string& method, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "aurk-eval";
  j["version"] = 1;
  j["method"] = method;
  j["avg_f1"] = report.avg_f1;
  j["zero_denominator_rule"] = "precision or recall with a zero denominator is 0; F1 is 0 when both are 0";
  nlohmann::ordered_json aus = nlohmann::ordered_json::array();
  for (const AuScore& s : report.per_au) {
    nlohmann::ordered_json a;
    a["au"] = s.au;
    a["f1"] = s.f1;
    a["precision"] = s.precision;
    a["recall"] = s.recall;
    a["tp"] = s.counts.tp;
    a["fp"] = s.counts.fp;
    a["fn"] = s.counts.fn;
    a["tn"] = s.counts.tn;
    aus.push_back(std::move(a));
  }
  j["per_au"] = std::move(aus);
  return j.dump(2) + "\n";
}

EvalReport parse_eval_json(std::string_view text) {
  EvalReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "aurk-eval") throw FormatError("not an aurk-eval summary");
    if (j.at("version") != 1) throw VersionError("eval summary version " + j.at("version").dump() + " is not supported");
    report.avg_f1 = j.at("avg_f1").get<double>();
    for (const auto& a : j.at("per_au")) {
      AuScore s;
      s.au = a.at("au").get<int>();
      s.f1 = a.at("f1").get<double>();
      s.precision = a.at("precision").get<double>();
      s.recall = a.at("recall").get<double>();
      s.counts = {a.at("tp").get<std::uint64_t>(), a.at("fp").get<std::uint64_t>(), a.at("fn").get<std::uint64_t>(),
                  a.at("tn").get<std::uint64_t>()};
      report.per_au.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("eval summary: ") + e.what());
  }
  return report;
}

std::string format_duration_csv(std::span<const AuDuration> stats) {
  std::string out = "AU,avg_duration,segment_count\n";
  for (const AuDuration& d : stats)
    out += std::to_string(d.au) + "," + csv::format_double(d.stat.avg_duration) + "," +
           std::to_string(d.stat.segments) + "\n";
  return out;
}

}  // namespace aurk
