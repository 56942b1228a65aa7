#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cytoiqa/aggregation.hpp"
#include "cytoiqa/image.hpp"

namespace cytoiqa {

/// Maps an image to a probability in [0,1] of belonging to the positive
/// class (in focus for the quality gate, a cell for the validity gate).
/// Scores must be deterministic in the pixel content.
class QualityScorer {
 public:
  virtual ~QualityScorer() = default;

  virtual double score(const ImageRgb& img) const = 0;

  /// False if score() must not be called from several threads at once.
  virtual bool concurrent_safe() const { return true; }
};

/// Variance of the 4-neighbour Laplacian response of the mean-of-channels
/// grayscale, over interior pixels. Throws kTooSmall below 3x3.
double laplacian_sharpness(const ImageRgb& img);

struct LogisticCalibration {
  double midpoint = 0.0;
  double scale = 1.0;  // > 0
};

/// 1 / (1 + exp(-(raw - midpoint) / scale)). Throws kInvalidArgument if scale <= 0.
double logistic_map(double raw, const LogisticCalibration& cal);

/// Calibration from labelled raw scores: the midpoint sits halfway between the
/// two class medians and a quarter of their gap becomes the scale. Throws
/// kDegenerateManifest if either class is missing.
LogisticCalibration fit_calibration(std::span<const std::pair<double, Label>> labelled_raw);

/// Classical focus-measure scorer; pure and fully concurrent.
class SharpnessScorer final : public QualityScorer {
 public:
  explicit SharpnessScorer(LogisticCalibration cal);

  double score(const ImageRgb& img) const override;
  const LogisticCalibration& calibration() const { return cal_; }

 private:
  LogisticCalibration cal_;
};

struct ModelMetadata {
  std::array<double, 3> channel_mean{0.0, 0.0, 0.0};
  std::array<double, 3> channel_std{1.0, 1.0, 1.0};
  int output_arity = 1;
};

/// Sidecar next to the model: same path with a .json extension, keys
/// channel_mean, channel_std, output_arity.
std::filesystem::path metadata_path_for(const std::filesystem::path& model_path);
ModelMetadata read_model_metadata(const std::filesystem::path& path);

/// 1x3xSxS float tensor (NCHW) after bilinear resize to `side`, [0,1]
/// normalization and per-channel standardization.
std::vector<float> preprocess_for_model(const ImageRgb& img, const ModelMetadata& meta,
                                        int side = 224);

/// Sigmoid for one output, positive-class softmax component for two.
double model_output_to_probability(std::span<const float> outputs);

/// Runs an externally trained ONNX network. The underlying runtime object is
/// stateful, so this scorer declares itself single-threaded.
class OnnxModelScorer final : public QualityScorer {
 public:
  /// Throws kModelLoad if the model or its metadata cannot be read.
  explicit OnnxModelScorer(const std::filesystem::path& model_path);
  OnnxModelScorer(const std::filesystem::path& model_path, ModelMetadata meta);
  ~OnnxModelScorer() override;

  OnnxModelScorer(const OnnxModelScorer&) = delete;
  OnnxModelScorer& operator=(const OnnxModelScorer&) = delete;

  double score(const ImageRgb& img) const override;
  bool concurrent_safe() const override { return false; }
  const ModelMetadata& metadata() const { return meta_; }

 private:
  struct Impl;
  ModelMetadata meta_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cytoiqa
