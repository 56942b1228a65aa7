#include <gtest/gtest.h>

#include <map>
#include <set>

#include "cytoiqa/error.hpp"
#include "cytoiqa/harness.hpp"
#include "cytoiqa/image_io.hpp"
#include "cytoiqa/serialization.hpp"
#include "support/fixtures.hpp"

namespace cytoiqa {
namespace {

using testing::ConstantScorer;
using testing::make_gate_corpus;

const std::filesystem::path kData = CYTOIQA_TEST_DATA;

/// Probability is the fragment's mean red value over 255.
class RedScorer final : public QualityScorer {
 public:
  double score(const ImageRgb& img) const override {
    double sum = 0;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) sum += img.at(x, y).r;
    }
    return sum / (255.0 * img.width() * img.height());
  }
};

ImageLoader solid_loader(int w, int h) {
  return [w, h](const SampleRecord&) { return ImageRgb(w, h, Rgb{90, 120, 150}); };
}

TEST(RunConfigTest, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  for (auto mutate : std::vector<std::function<void(RunConfig&)>>{
           [](RunConfig& r) { r.patch_size = 0; }, [](RunConfig& r) { r.crop_size = 0; },
           [](RunConfig& r) { r.threshold = 1.5; }, [](RunConfig& r) { r.workers = 0; }}) {
    RunConfig bad;
    mutate(bad);
    try {
      bad.validate();
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfiguration);
    }
  }
}

TEST(RunConfigTest, NaturalEdgeModes) {
  EXPECT_EQ(natural_edge_mode(StrategyId::kRgbVarSize), EdgeMode::kPadPartial);
  EXPECT_EQ(natural_edge_mode(StrategyId::kSatVarSize), EdgeMode::kPadPartial);
  EXPECT_EQ(natural_edge_mode(StrategyId::kRgbVar), EdgeMode::kDropPartial);
  RunConfig c;
  c.strategy = StrategyId::kSatVarSize;
  EXPECT_EQ(effective_edge_mode(c), EdgeMode::kPadPartial);
  c.edge_mode = EdgeMode::kDropPartial;
  EXPECT_EQ(effective_edge_mode(c), EdgeMode::kDropPartial);
}

TEST(RunGateTest, ControlScoresOncePerImage) {
  const auto records = testing::synthetic_manifest(5);
  RunConfig c;
  c.strategy = StrategyId::kControl;
  c.patch_size = 32;
  const auto r = run_gate(c, records, ConstantScorer(0.3), solid_loader(100, 80));
  EXPECT_EQ(r.scorer_calls, records.size());
  for (const auto& d : r.decisions) EXPECT_EQ(d.fragments, 1u);
}

TEST(RunGateTest, FullResolutionDropGridHasFifteenFragments) {
  const auto records = testing::synthetic_manifest(1);
  RunConfig c;
  c.patch_size = 500;
  c.edge_mode = EdgeMode::kDropPartial;
  const auto r = run_gate(c, records, ConstantScorer(0.5), solid_loader(2592, 1944));
  EXPECT_EQ(r.scorer_calls, 30u);
  EXPECT_EQ(r.decisions[0].fragments, 15u);
}

TEST(RunGateTest, ConstantScorerDecidesEverythingPositive) {
  const auto records = testing::synthetic_manifest(6, 3);
  std::size_t positives = 0;
  for (const auto& rec : records) positives += rec.label == Label::kPositive;
  RunConfig c;
  c.patch_size = 16;
  const auto r = run_gate(c, records, ConstantScorer(0.9), solid_loader(40, 40));
  for (const auto& d : r.decisions) EXPECT_EQ(d.decision, Label::kPositive);
  EXPECT_DOUBLE_EQ(r.summary.per_fold[0].accuracy,
                   static_cast<double>(positives) / static_cast<double>(records.size()));
  EXPECT_EQ(r.image_seconds.size(), records.size());
  EXPECT_GE(r.total_seconds, 0.0);
}

TEST(RunGateTest, InvocationAuditMatchesFragmentCounts) {
  const auto corpus = make_gate_corpus(6, 90, 0.2, 2.0, 4);
  for (StrategyId id : kAllStrategies) {
    RunConfig c;
    c.strategy = id;
    c.patch_size = 25;
    const auto r = run_gate(c, corpus.records, RedScorer(), corpus.loader());
    std::uint64_t fragments = 0;
    for (const auto& d : r.decisions) fragments += d.fragments;
    EXPECT_EQ(r.scorer_calls, fragments) << to_string(id);
  }
}

TEST(RunGateTest, UnreadableImagesAreExcluded) {
  auto records = testing::synthetic_manifest(3);
  ImageLoader loader = [](const SampleRecord& r) -> ImageRgb {
    if (r.sample_id == "lq/p1") throw Error(ErrorCode::kIo, "gone");
    return ImageRgb(30, 30, Rgb{1, 2, 3});
  };
  RunConfig c;
  c.patch_size = 10;
  const auto r = run_gate(c, records, ConstantScorer(0.2), loader);
  EXPECT_EQ(r.decisions.size(), 5u);
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_NE(r.excluded[0].find("lq/p1"), std::string::npos);
  EXPECT_EQ(r.counts.total(), 5u);

  ImageLoader none = [](const SampleRecord&) -> ImageRgb { throw Error(ErrorCode::kIo, "x"); };
  EXPECT_THROW(run_gate(c, records, ConstantScorer(0.2), none), Error);
}

TEST(RunGateTest, ScorerFailureAborts) {
  class Failing final : public QualityScorer {
   public:
    double score(const ImageRgb&) const override { throw Error(ErrorCode::kShapeMismatch, "x"); }
  };
  RunConfig c;
  c.patch_size = 10;
  c.workers = 3;
  EXPECT_THROW(run_gate(c, testing::synthetic_manifest(2), Failing(), solid_loader(30, 30)),
               Error);
}

TEST(RunGateTest, WorkerCountDoesNotChangeResults) {
  const auto corpus = make_gate_corpus(8, 120, 0.2, 2.0, 11);
  RunConfig c;
  c.patch_size = 30;
  c.strategy = StrategyId::kSatVarSize;
  c.crop_size = 100;
  c.seed = 99;
  const auto one = run_gate(c, corpus.records, RedScorer(), corpus.loader());
  c.workers = 6;
  const auto many = run_gate(c, corpus.records, RedScorer(), corpus.loader());
  EXPECT_EQ(format_decision_log(one.decisions), format_decision_log(many.decisions));
  EXPECT_EQ(one.counts, many.counts);
}

TEST(RunGateTest, DecisionLogIsDeterministicAndSeeded) {
  const auto corpus = make_gate_corpus(6, 100, 0.2, 2.0, 12);
  RunConfig c;
  c.strategy = StrategyId::kControl;
  c.patch_size = 20;
  c.seed = 5;
  const auto a = format_decision_log(run_gate(c, corpus.records, RedScorer(),
                                              corpus.loader()).decisions);
  EXPECT_EQ(a, format_decision_log(
                   run_gate(c, corpus.records, RedScorer(), corpus.loader()).decisions));
  c.seed = 6;
  EXPECT_NE(a, format_decision_log(
                   run_gate(c, corpus.records, RedScorer(), corpus.loader()).decisions));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 12);
  EXPECT_NE(a.find("\"sample_id\":\"hq/specimen0000\""), std::string::npos);
}

TEST(RunGateTest, ReadsManifestFromDisk) {
  const auto corpus = make_gate_corpus(3, 64, 0.3, 2.0, 2);
  testing::TempDir dir("gate_disk");
  const auto manifest = testing::write_corpus(corpus, dir.path());
  RunConfig c;
  c.manifest = manifest;
  c.patch_size = 16;
  const auto from_disk = run_gate(c, RedScorer());
  const auto in_memory = run_gate(c, corpus.records, RedScorer(), corpus.loader());
  EXPECT_EQ(format_decision_log(from_disk.decisions), format_decision_log(in_memory.decisions));
}

TEST(RunGateTest, ModelScorerAcrossWorkers) {
  const OnnxModelScorer model(kData / "stub_linear.onnx");
  const auto corpus = make_gate_corpus(4, 80, 0.2, 2.0, 3);
  RunConfig c;
  c.patch_size = 40;
  const auto one = run_gate(c, corpus.records, model, corpus.loader());
  c.workers = 4;
  const auto many = run_gate(c, corpus.records, model, corpus.loader());
  EXPECT_EQ(format_decision_log(one.decisions), format_decision_log(many.decisions));
  EXPECT_EQ(many.scorer_calls, 4u * 2u * 4u);
}

TEST(CompareStrategiesTest, EqualProbabilitiesGiveEqualMetrics) {
  const auto corpus = make_gate_corpus(5, 90, 0.2, 2.0, 8);
  RunConfig c;
  c.patch_size = 30;
  const auto runs = compare_strategies(c, corpus.records, ConstantScorer(0.7), corpus.loader());
  ASSERT_EQ(runs.size(), kAllStrategies.size());
  for (const auto& run : runs) {
    EXPECT_EQ(run.result.counts, runs[0].result.counts);
    for (const auto& d : run.result.decisions) EXPECT_NEAR(d.probability, 0.7, 1e-12);
  }
}

TEST(CompareStrategiesTest, EnsemblesCallMoreThanControl) {
  const auto corpus = make_gate_corpus(4, 90, 0.2, 2.0, 8);
  RunConfig c;
  c.patch_size = 30;
  const auto runs = compare_strategies(c, corpus.records, RedScorer(), corpus.loader());
  std::map<StrategyId, std::uint64_t> calls;
  for (const auto& run : runs) calls[run.strategy] = run.result.scorer_calls;
  EXPECT_EQ(calls.at(StrategyId::kControl), corpus.records.size());
  for (const auto& [id, n] : calls) {
    if (id != StrategyId::kControl) EXPECT_GT(n, calls.at(StrategyId::kControl));
  }
}

TEST(SweepCropSizesTest, RowsDeterminismAndFullSize) {
  const auto records = testing::synthetic_manifest(1);
  const std::vector<int> sizes{500, 1250, 1944};
  RunConfig c;
  c.patch_size = 250;
  c.seed = 3;
  // Vertical red ramp: probability depends on where the crop lands.
  ImageLoader ramp = [](const SampleRecord&) {
    ImageRgb img(2592, 1944);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        img.set(x, y, Rgb{static_cast<std::uint8_t>(x * 255 / 2591), 0, 0});
      }
    }
    return img;
  };
  const auto a = sweep_crop_sizes(c, sizes, records, RedScorer(), ramp);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[1].crop_size, 1250);
  const auto b = sweep_crop_sizes(c, sizes, records, RedScorer(), ramp);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].accuracy, b[i].accuracy);
    EXPECT_EQ(format_decision_log(a[i].result.decisions),
              format_decision_log(b[i].result.decisions));
  }

  const auto corpus = make_gate_corpus(3, 60, 0.3, 2.0, 1);
  RunConfig full;
  full.patch_size = 20;
  const std::vector<int> whole{60};
  const auto swept = sweep_crop_sizes(full, whole, corpus.records, RedScorer(), corpus.loader());
  const auto plain = run_gate(full, corpus.records, RedScorer(), corpus.loader());
  EXPECT_EQ(format_decision_log(swept[0].result.decisions), format_decision_log(plain.decisions));
}

TEST(SweepCropSizesTest, OversizedCropFails) {
  RunConfig c;
  c.patch_size = 10;
  const std::vector<int> sizes{50};
  EXPECT_THROW(sweep_crop_sizes(c, sizes, testing::synthetic_manifest(1), ConstantScorer(0.5),
                                solid_loader(40, 40)),
               Error);
}

TEST(RunCvTest, FullCorpusFoldsAreEvenAndDeterministic) {
  const auto records = testing::synthetic_manifest(2600);
  RunConfig c;
  c.patch_size = 4;
  c.strategy = StrategyId::kControl;
  c.seed = 21;
  const auto cv = run_cv(records, CvOptions{}, c, ConstantScorer(0.9), solid_loader(8, 8));
  ASSERT_EQ(cv.folds.size(), 5u);
  std::set<std::string> seen;
  for (const auto& f : cv.folds) {
    EXPECT_EQ(f.test_ids.size() % 2, 0u);
    EXPECT_EQ(f.test_ids.size(), 1040u);
    for (const auto& id : f.test_ids) EXPECT_TRUE(seen.insert(id).second);
    // 4160 training records = 2080 pairs; 312 pairs held out for validation.
    EXPECT_EQ(f.validation_ids.size(), 624u);
    EXPECT_EQ(f.train_batches.size(), (4160u - 624u) / 16u);
  }
  EXPECT_EQ(seen.size(), records.size());
  EXPECT_DOUBLE_EQ(cv.summary.accuracy.mean, 0.5);

  const auto again = run_cv(records, CvOptions{}, c, ConstantScorer(0.9), solid_loader(8, 8));
  EXPECT_EQ(again.plan.assignment, cv.plan.assignment);
  EXPECT_EQ(again.summary.accuracy.mean, cv.summary.accuracy.mean);
  EXPECT_EQ(again.folds[2].validation_ids, cv.folds[2].validation_ids);
}

TEST(RunCvTest, DiffIdxNeedsPairs) {
  CvOptions o;
  o.split = SplitStrategy::kDiffIdx;
  RunConfig c;
  c.patch_size = 4;
  EXPECT_THROW(run_cv(testing::synthetic_manifest(10, 1), o, c, ConstantScorer(0.5),
                      solid_loader(8, 8)),
               Error);
}

TEST(CalibrateBaselineTest, SeparatesSharpFromBlurred) {
  const auto corpus = make_gate_corpus(10, 80, 0.3, 2.0, 6);
  const auto cal = calibrate_baseline(corpus.records, corpus.loader());
  const SharpnessScorer scorer(cal);
  RunConfig c;
  c.patch_size = 80;
  const auto r = run_gate(c, corpus.records, scorer, corpus.loader());
  EXPECT_EQ(r.summary.per_fold[0].accuracy, 1.0);
}

TEST(ParallelForTest, CoversRangeAndPropagatesErrors) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 7, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(50, 4,
                            [](std::size_t i) {
                              if (i == 17) throw Error(ErrorCode::kIo, "boom");
                            }),
               Error);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

}  // namespace
}  // namespace cytoiqa
