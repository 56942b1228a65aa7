#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cytoiqa/aggregation.hpp"
#include "cytoiqa/classifier.hpp"
#include "cytoiqa/datasets.hpp"
#include "cytoiqa/metrics.hpp"
#include "cytoiqa/slicing.hpp"

namespace cytoiqa {

struct RunConfig {
  std::filesystem::path manifest;
  StrategyId strategy = StrategyId::kRgbVar;
  int patch_size = 500;
  // Unset: pad_partial for the size-weighted strategies, drop_partial otherwise.
  std::optional<EdgeMode> edge_mode;
  // Square random crop applied before slicing.
  std::optional<int> crop_size;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  int workers = 1;

  /// Throws kInvalidConfiguration on out-of-range fields.
  void validate() const;
};

EdgeMode natural_edge_mode(StrategyId strategy);
EdgeMode effective_edge_mode(const RunConfig& config);

/// Loader used by the drivers; any cytoiqa::Error it throws excludes the image.
using ImageLoader = std::function<ImageRgb(const SampleRecord&)>;

/// Reads record.path, resolving relative paths against `base_dir`.
ImageLoader disk_loader(std::filesystem::path base_dir = {});

/// Counts score() calls; forwards to the wrapped scorer.
class CountingScorer final : public QualityScorer {
 public:
  explicit CountingScorer(const QualityScorer& inner) : inner_(inner) {}

  double score(const ImageRgb& img) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.score(img);
  }
  bool concurrent_safe() const override { return inner_.concurrent_safe(); }
  std::uint64_t calls() const { return calls_.load(); }

 private:
  const QualityScorer& inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// Serializes score() for scorers that are not concurrent_safe.
class SerializedScorer final : public QualityScorer {
 public:
  explicit SerializedScorer(const QualityScorer& inner) : inner_(inner) {}

  double score(const ImageRgb& img) const override {
    std::lock_guard lock(mutex_);
    return inner_.score(img);
  }

 private:
  const QualityScorer& inner_;
  mutable std::mutex mutex_;
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown is rethrown after all workers have joined.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct Fragment {
  ImageRgb pixels;
  PatchScore stats;  // probability left at 0 until scored
};

/// The fragments one image contributes under `config`: one random patch for
/// control, the slicing grid otherwise. `key` seeds the per-image crops.
std::vector<Fragment> prepare_fragments(const ImageRgb& img, const RunConfig& config,
                                        const std::string& key);

struct Decision {
  std::string sample_id;
  Label label = Label::kNegative;
  double probability = 0.0;
  Label decision = Label::kNegative;
  std::size_t fragments = 0;
};

struct GateResult {
  std::vector<Decision> decisions;
  ConfusionCounts counts;
  MetricsSummary summary;
  std::vector<double> image_seconds;
  double total_seconds = 0.0;
  std::uint64_t scorer_calls = 0;
  std::vector<std::string> excluded;  // "sample_id: reason"
};

/// One JSON object per decision, in manifest order. Contains no timing, so it
/// is a pure function of the inputs.
std::string format_decision_log(std::span<const Decision> decisions);

/// Per image: optional crop, fragments, scoring, aggregation and decision.
/// Metrics compare decisions against the manifest labels.
GateResult run_gate(const RunConfig& config, const std::vector<SampleRecord>& records,
                    const QualityScorer& scorer, const ImageLoader& loader);

/// Reads config.manifest and resolves image paths relative to it.
GateResult run_gate(const RunConfig& config, const QualityScorer& scorer);

struct StrategyRun {
  StrategyId strategy;
  GateResult result;
};

/// All seven strategies on identical inputs, each with its natural edge mode.
std::vector<StrategyRun> compare_strategies(const RunConfig& config,
                                            const std::vector<SampleRecord>& records,
                                            const QualityScorer& scorer,
                                            const ImageLoader& loader);

struct SweepRow {
  int crop_size = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  GateResult result;
};

std::vector<SweepRow> sweep_crop_sizes(const RunConfig& config, std::span<const int> sizes,
                                       const std::vector<SampleRecord>& records,
                                       const QualityScorer& scorer, const ImageLoader& loader);

struct CvFold {
  int fold = 0;
  std::vector<std::string> test_ids;
  std::vector<std::string> validation_ids;
  std::vector<Batch> train_batches;
  GateResult result;
};

struct CvResult {
  SplitPlan plan;
  std::vector<CvFold> folds;
  MetricsSummary summary;
};

struct CvOptions {
  int k = 5;
  SplitStrategy split = SplitStrategy::kSameIdx;
  ShuffleMode shuffle = ShuffleMode::kPair;
  int batch_size = 16;
  double validation_fraction = 0.15;
};

/// Plans the folds, scores every held-out fold and summarizes mean +- std.
/// Also lays out validation holdouts and batch orders for an external trainer.
CvResult run_cv(const std::vector<SampleRecord>& records, const CvOptions& options,
                const RunConfig& config, const QualityScorer& scorer, const ImageLoader& loader);

/// Fits the baseline calibration from whole-image sharpness of labelled records.
LogisticCalibration calibrate_baseline(const std::vector<SampleRecord>& records,
                                       const ImageLoader& loader);

}  // namespace cytoiqa
