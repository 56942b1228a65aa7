#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cytoiqa/aggregation.hpp"

namespace cytoiqa {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct BinaryMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision, recall and f1 fall back to 0 on a zero denominator.
/// Throws kEmptyEvaluation when the table is empty.
BinaryMetrics compute_metrics(const ConfusionCounts& c);

/// Throws kLengthMismatch on unequal lengths and kEmptyEvaluation on empty input.
ConfusionCounts accumulate(std::span<const Label> labels, std::span<const Label> predictions);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1) estimator, 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct MetricsSummary {
  std::vector<BinaryMetrics> per_fold;
  std::vector<double> fold_seconds;
  MeanStd accuracy;
  MeanStd precision;
  MeanStd recall;
  MeanStd f1;
  double total_seconds = 0.0;
  MeanStd seconds;
};

/// Mean and sample std across folds. `fold_seconds` may be empty or one entry
/// per fold. Throws kEmptyInput without folds.
MetricsSummary fold_summary(std::span<const BinaryMetrics> per_fold,
                            std::span<const double> fold_seconds = {});

/// One row of the human-readable table.
struct ReportRow {
  std::string name;
  MetricsSummary summary;
};

/// Pipe-delimited table: Experiment | Accuracy [%] | F1 Score [%] |
/// Precision [%] | Recall [%] | Total Time [s] | Avg. Time [s].
std::string format_table(std::span<const ReportRow> rows);

/// One JSON object per row.
std::string format_jsonl(std::span<const ReportRow> rows);

}  // namespace cytoiqa
