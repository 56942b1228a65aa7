#include "cytoiqa/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include "cytoiqa/error.hpp"
#include "cytoiqa/imaging.hpp"

namespace cytoiqa {

double laplacian_sharpness(const ImageRgb& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorCode::kTooSmall, "sharpness needs at least 3x3 pixels, got " +
                                          std::to_string(w) + "x" + std::to_string(h));
  }
  // Grayscale kept as r+g+b (0..765) so the response is an integer and the
  // variance can be accumulated exactly.
  std::vector<int> gray(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const auto row = img.row(y);
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(x) * 3;
      gray[static_cast<std::size_t>(y) * w + x] = row[i] + row[i + 1] + row[i + 2];
    }
  }
  std::int64_t sum = 0;
  std::uint64_t sum_sq = 0;
  for (int y = 1; y < h - 1; ++y) {
    const int* up = &gray[static_cast<std::size_t>(y - 1) * w];
    const int* mid = &gray[static_cast<std::size_t>(y) * w];
    const int* down = &gray[static_cast<std::size_t>(y + 1) * w];
    for (int x = 1; x < w - 1; ++x) {
      const std::int64_t r = up[x] + down[x] + mid[x - 1] + mid[x + 1] - 4 * mid[x];
      sum += r;
      sum_sq += static_cast<std::uint64_t>(r * r);
    }
  }
  const std::int64_t n = static_cast<std::int64_t>(w - 2) * (h - 2);
  const auto abs_sum = static_cast<unsigned __int128>(sum < 0 ? -sum : sum);
  const unsigned __int128 num =
      static_cast<unsigned __int128>(n) * sum_sq - abs_sum * abs_sum;
  const double denom = static_cast<double>(n) * static_cast<double>(n) * 765.0 * 765.0;
  return static_cast<double>(num) / denom;
}

double logistic_map(double raw, const LogisticCalibration& cal) {
  if (!(cal.scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "logistic scale must be positive");
  }
  const double z = (raw - cal.midpoint) / cal.scale;
  // Evaluate on the side where exp() cannot overflow.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LogisticCalibration fit_calibration(std::span<const std::pair<double, Label>> labelled_raw) {
  std::vector<double> pos;
  std::vector<double> neg;
  for (const auto& [raw, label] : labelled_raw) {
    (label == Label::kPositive ? pos : neg).push_back(raw);
  }
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorCode::kDegenerateManifest, "calibration needs both labels");
  }
  const double mp = median(std::move(pos));
  const double mn = median(std::move(neg));
  return {0.5 * (mp + mn), std::max(std::abs(mp - mn) / 4.0, 1e-12)};
}

SharpnessScorer::SharpnessScorer(LogisticCalibration cal) : cal_(cal) {
  if (!(cal_.scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "logistic scale must be positive");
  }
}

double SharpnessScorer::score(const ImageRgb& img) const {
  return logistic_map(laplacian_sharpness(img), cal_);
}

std::filesystem::path metadata_path_for(const std::filesystem::path& model_path) {
  auto p = model_path;
  p.replace_extension(".json");
  return p;
}

ModelMetadata read_model_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kModelLoad, "cannot open model metadata " + path.string());
  ModelMetadata meta;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto mean = j.at("channel_mean").get<std::vector<double>>();
    const auto stdev = j.at("channel_std").get<std::vector<double>>();
    if (mean.size() != 3 || stdev.size() != 3) {
      throw Error(ErrorCode::kModelLoad, "channel_mean/channel_std need 3 entries");
    }
    std::copy(mean.begin(), mean.end(), meta.channel_mean.begin());
    std::copy(stdev.begin(), stdev.end(), meta.channel_std.begin());
    meta.output_arity = j.at("output_arity").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kModelLoad, "bad model metadata " + path.string() + ": " + e.what());
  }
  if (meta.output_arity != 1 && meta.output_arity != 2) {
    throw Error(ErrorCode::kModelLoad, "output_arity must be 1 or 2");
  }
  for (double s : meta.channel_std) {
    if (!(s > 0.0)) throw Error(ErrorCode::kModelLoad, "channel_std entries must be positive");
  }
  return meta;
}

std::vector<float> preprocess_for_model(const ImageRgb& img, const ModelMetadata& meta,
                                        int side) {
  const ImageRgb resized = resize_bilinear(img, side, side);
  const std::size_t plane = static_cast<std::size_t>(side) * side;
  std::vector<float> tensor(plane * 3);
  for (int y = 0; y < side; ++y) {
    const auto row = resized.row(y);
    for (int x = 0; x < side; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = row[static_cast<std::size_t>(x) * 3 + c] / 255.0;
        tensor[c * plane + static_cast<std::size_t>(y) * side + x] =
            static_cast<float>((v - meta.channel_mean[c]) / meta.channel_std[c]);
      }
    }
  }
  return tensor;
}

double model_output_to_probability(std::span<const float> outputs) {
  if (outputs.size() == 1) return logistic_map(outputs[0], {0.0, 1.0});
  if (outputs.size() == 2) {
    // softmax component of index 1 == sigmoid(z1 - z0)
    return logistic_map(static_cast<double>(outputs[1]) - outputs[0], {0.0, 1.0});
  }
  throw Error(ErrorCode::kShapeMismatch,
              "model must produce 1 or 2 outputs, got " + std::to_string(outputs.size()));
}

struct OnnxModelScorer::Impl {
  mutable cv::dnn::Net net;
};

OnnxModelScorer::OnnxModelScorer(const std::filesystem::path& model_path)
    : OnnxModelScorer(model_path, read_model_metadata(metadata_path_for(model_path))) {}

OnnxModelScorer::OnnxModelScorer(const std::filesystem::path& model_path, ModelMetadata meta)
    : meta_(meta), impl_(std::make_unique<Impl>()) {
  if (!std::filesystem::is_regular_file(model_path)) {
    throw Error(ErrorCode::kModelLoad, "model file not found: " + model_path.string());
  }
  try {
    impl_->net = cv::dnn::readNetFromONNX(model_path.string());
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kModelLoad, "cannot load " + model_path.string() + ": " + e.what());
  }
  if (impl_->net.empty()) {
    throw Error(ErrorCode::kModelLoad, "empty network in " + model_path.string());
  }
}

OnnxModelScorer::~OnnxModelScorer() = default;

double OnnxModelScorer::score(const ImageRgb& img) const {
  constexpr int kSide = 224;
  std::vector<float> tensor = preprocess_for_model(img, meta_, kSide);
  const int dims[] = {1, 3, kSide, kSide};
  const cv::Mat blob(4, dims, CV_32F, tensor.data());
  cv::Mat out;
  try {
    impl_->net.setInput(blob);
    out = impl_->net.forward();
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string("model rejected the 1x3x224x224 input: ") + e.what());
  }
  if (out.type() != CV_32F || static_cast<int>(out.total()) != meta_.output_arity) {
    throw Error(ErrorCode::kShapeMismatch,
                "model produced " + std::to_string(out.total()) + " outputs, metadata says " +
                    std::to_string(meta_.output_arity));
  }
  return model_output_to_probability(
      std::span<const float>(out.ptr<float>(), static_cast<std::size_t>(out.total())));
}

}  // namespace cytoiqa
