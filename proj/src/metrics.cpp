#include "cytoiqa/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cytoiqa/error.hpp"

namespace cytoiqa {

BinaryMetrics compute_metrics(const ConfusionCounts& c) {
  const std::uint64_t total = c.total();
  if (total == 0) throw Error(ErrorCode::kEmptyEvaluation, "confusion table is empty");
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  BinaryMetrics m;
  m.accuracy = ratio(c.tp + c.tn, total);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

ConfusionCounts accumulate(std::span<const Label> labels, std::span<const Label> predictions) {
  if (labels.size() != predictions.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(labels.size()) + " labels vs " +
                    std::to_string(predictions.size()) + " predictions");
  }
  if (labels.empty()) throw Error(ErrorCode::kEmptyEvaluation, "nothing to accumulate");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] == Label::kPositive;
    const bool pred = predictions[i] == Label::kPositive;
    if (truth && pred) ++c.tp;
    else if (!truth && pred) ++c.fp;
    else if (!truth && !pred) ++c.tn;
    else ++c.fn;
  }
  return c;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return {mean, std::sqrt(acc / static_cast<double>(values.size() - 1))};
}

MetricsSummary fold_summary(std::span<const BinaryMetrics> per_fold,
                            std::span<const double> fold_seconds) {
  if (per_fold.empty()) throw Error(ErrorCode::kEmptyInput, "fold summary needs >= 1 fold");
  if (!fold_seconds.empty() && fold_seconds.size() != per_fold.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one timing entry per fold expected");
  }
  MetricsSummary s;
  s.per_fold.assign(per_fold.begin(), per_fold.end());
  s.fold_seconds.assign(fold_seconds.begin(), fold_seconds.end());
  auto column = [&](double BinaryMetrics::*field) {
    std::vector<double> v;
    v.reserve(per_fold.size());
    for (const auto& m : per_fold) v.push_back(m.*field);
    return mean_std(v);
  };
  s.accuracy = column(&BinaryMetrics::accuracy);
  s.precision = column(&BinaryMetrics::precision);
  s.recall = column(&BinaryMetrics::recall);
  s.f1 = column(&BinaryMetrics::f1);
  for (double t : fold_seconds) s.total_seconds += t;
  s.seconds = mean_std(fold_seconds);
  return s;
}

namespace {

std::string pct(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f +- %.2f", 100.0 * m.mean, 100.0 * m.std);
  return buf;
}

std::string secs(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f +- %.3f", m.mean, m.std);
  return buf;
}

nlohmann::json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

std::string format_table(std::span<const ReportRow> rows) {
  std::ostringstream out;
  out << "Experiment | Accuracy [%] | F1 Score [%] | Precision [%] | Recall [%] | "
         "Total Time [s] | Avg. Time [s]\n";
  for (const auto& row : rows) {
    const auto& s = row.summary;
    char total[32];
    std::snprintf(total, sizeof total, "%.3f", s.total_seconds);
    out << row.name << " | " << pct(s.accuracy) << " | " << pct(s.f1) << " | "
        << pct(s.precision) << " | " << pct(s.recall) << " | " << total << " | "
        << secs(s.seconds) << "\n";
  }
  return out.str();
}

std::string format_jsonl(std::span<const ReportRow> rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    const auto& s = row.summary;
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& m : s.per_fold) {
      folds.push_back({{"accuracy", m.accuracy},
                       {"f1", m.f1},
                       {"precision", m.precision},
                       {"recall", m.recall}});
    }
    const nlohmann::json j = {{"experiment", row.name},
                              {"accuracy", to_json(s.accuracy)},
                              {"f1", to_json(s.f1)},
                              {"precision", to_json(s.precision)},
                              {"recall", to_json(s.recall)},
                              {"total_time_s", s.total_seconds},
                              {"avg_time_s", to_json(s.seconds)},
                              {"folds", folds}};
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace cytoiqa
