#include "cytoiqa/harness.hpp"

#include <chrono>
#include <exception>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cytoiqa/error.hpp"
#include "cytoiqa/image_io.hpp"
#include "cytoiqa/imaging.hpp"
#include "cytoiqa/rng.hpp"
#include "cytoiqa/serialization.hpp"

namespace cytoiqa {

void RunConfig::validate() const {
  if (patch_size < 1) throw Error(ErrorCode::kInvalidConfiguration, "patch size must be >= 1");
  if (crop_size && *crop_size < 1) {
    throw Error(ErrorCode::kInvalidConfiguration, "crop size must be >= 1");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfiguration, "threshold must lie in [0,1]");
  }
  if (workers < 1) throw Error(ErrorCode::kInvalidConfiguration, "workers must be >= 1");
}

EdgeMode natural_edge_mode(StrategyId strategy) {
  return uses_size_weight(strategy) ? EdgeMode::kPadPartial : EdgeMode::kDropPartial;
}

EdgeMode effective_edge_mode(const RunConfig& config) {
  return config.edge_mode.value_or(natural_edge_mode(config.strategy));
}

ImageLoader disk_loader(std::filesystem::path base_dir) {
  return [base = std::move(base_dir)](const SampleRecord& r) {
    std::filesystem::path p(r.path);
    if (p.is_relative() && !base.empty()) p = base / p;
    return read_image(p);
  };
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::vector<Fragment> prepare_fragments(const ImageRgb& img, const RunConfig& config,
                                        const std::string& key) {
  const ImageRgb working = config.crop_size
                               ? random_crop(img, *config.crop_size,
                                             derive_seed(config.seed, "crop:" + key))
                               : img;
  std::vector<Fragment> out;
  if (config.strategy == StrategyId::kControl) {
    const Region r = random_crop_region(working.width(), working.height(), config.patch_size,
                                        derive_seed(config.seed, "control:" + key));
    out.push_back({crop(working, r),
                   {0.0, rgb_channel_variance(working, r), saturation_variance(working, r), 1.0}});
    return out;
  }
  const EdgeMode mode = effective_edge_mode(config);
  const auto specs = slice_grid(working.width(), working.height(), config.patch_size, mode);
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    out.push_back({extract_fragment(working, spec, mode),
                   {0.0, rgb_channel_variance(working, spec.source),
                    saturation_variance(working, spec.source), spec.valid_fraction}});
  }
  return out;
}

std::string format_decision_log(std::span<const Decision> decisions) {
  std::ostringstream out;
  for (const auto& d : decisions) {
    const nlohmann::json j = {{"sample_id", d.sample_id},
                              {"label", to_string(d.label)},
                              {"probability", d.probability},
                              {"decision", to_string(d.decision)},
                              {"fragments", d.fragments}};
    out << j.dump() << "\n";
  }
  return out.str();
}

GateResult run_gate(const RunConfig& config, const std::vector<SampleRecord>& records,
                    const QualityScorer& scorer, const ImageLoader& loader) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  std::optional<SerializedScorer> serialized;
  if (!scorer.concurrent_safe() && config.workers > 1) serialized.emplace(scorer);
  const CountingScorer counted(serialized ? static_cast<const QualityScorer&>(*serialized)
                                          : scorer);

  GateResult result;
  std::vector<Label> labels;
  std::vector<Label> predictions;
  const auto run_start = Clock::now();
  for (const auto& record : records) {
    std::optional<ImageRgb> img;
    try {
      img = loader(record);
    } catch (const Error& e) {
      result.excluded.push_back(record.sample_id + ": " + e.what());
      continue;
    }
    const auto start = Clock::now();
    auto fragments = prepare_fragments(*img, config, record.sample_id);
    parallel_for(fragments.size(), config.workers, [&](std::size_t i) {
      fragments[i].stats.probability = counted.score(fragments[i].pixels);
    });
    std::vector<PatchScore> scores;
    scores.reserve(fragments.size());
    for (const auto& f : fragments) scores.push_back(f.stats);
    const double p = aggregate(config.strategy, scores);
    const Label decision = decide(p, config.threshold);
    result.image_seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());

    result.decisions.push_back({record.sample_id, record.label, p, decision, fragments.size()});
    labels.push_back(record.label);
    predictions.push_back(decision);
  }
  result.total_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  result.scorer_calls = counted.calls();
  if (result.decisions.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "no readable images to evaluate");
  }
  result.counts = accumulate(labels, predictions);
  const BinaryMetrics metrics = compute_metrics(result.counts);
  result.summary = fold_summary(std::span(&metrics, 1));
  result.summary.total_seconds = result.total_seconds;
  result.summary.seconds = mean_std(result.image_seconds);
  return result;
}

GateResult run_gate(const RunConfig& config, const QualityScorer& scorer) {
  const auto records = read_manifest(config.manifest);
  return run_gate(config, records, scorer, disk_loader(config.manifest.parent_path()));
}

std::vector<StrategyRun> compare_strategies(const RunConfig& config,
                                            const std::vector<SampleRecord>& records,
                                            const QualityScorer& scorer,
                                            const ImageLoader& loader) {
  std::vector<StrategyRun> runs;
  for (StrategyId id : kAllStrategies) {
    RunConfig c = config;
    c.strategy = id;
    c.edge_mode.reset();
    runs.push_back({id, run_gate(c, records, scorer, loader)});
  }
  return runs;
}

std::vector<SweepRow> sweep_crop_sizes(const RunConfig& config, std::span<const int> sizes,
                                       const std::vector<SampleRecord>& records,
                                       const QualityScorer& scorer, const ImageLoader& loader) {
  std::vector<SweepRow> rows;
  for (int size : sizes) {
    RunConfig c = config;
    c.crop_size = size;
    GateResult r = run_gate(c, records, scorer, loader);
    const auto& m = r.summary.per_fold.front();
    rows.push_back({size, m.accuracy, m.f1, std::move(r)});
  }
  return rows;
}

CvResult run_cv(const std::vector<SampleRecord>& records, const CvOptions& options,
                const RunConfig& config, const QualityScorer& scorer, const ImageLoader& loader) {
  CvResult cv;
  cv.plan = plan_kfold(records, options.k, options.split, config.seed);
  std::vector<BinaryMetrics> per_fold;
  std::vector<double> seconds;
  for (int f = 0; f < options.k; ++f) {
    CvFold fold;
    fold.fold = f;
    const auto test = cv.plan.fold_records(records, f);
    const auto train = cv.plan.training_records(records, f);
    for (const auto& r : test) fold.test_ids.push_back(r.sample_id);
    const auto tag = std::to_string(f);
    const auto holdout = holdout_validation(train, options.validation_fraction,
                                            derive_seed(config.seed, "holdout:" + tag));
    for (const auto& r : holdout.validation) fold.validation_ids.push_back(r.sample_id);
    fold.train_batches = order_batches(holdout.train, options.batch_size, options.shuffle,
                                       derive_seed(config.seed, "batches:" + tag));
    fold.result = run_gate(config, test, scorer, loader);
    per_fold.push_back(fold.result.summary.per_fold.front());
    seconds.push_back(fold.result.total_seconds);
    cv.folds.push_back(std::move(fold));
  }
  cv.summary = fold_summary(per_fold, seconds);
  return cv;
}

LogisticCalibration calibrate_baseline(const std::vector<SampleRecord>& records,
                                       const ImageLoader& loader) {
  std::vector<std::pair<double, Label>> raw;
  for (const auto& r : records) {
    try {
      raw.emplace_back(laplacian_sharpness(loader(r)), r.label);
    } catch (const Error&) {
      continue;
    }
  }
  return fit_calibration(raw);
}

}  // namespace cytoiqa
