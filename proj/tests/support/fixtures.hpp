#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cytoiqa/datasets.hpp"
#include "cytoiqa/harness.hpp"
#include "cytoiqa/image.hpp"

namespace cytoiqa::testing {

/// Independent per-channel uniform noise.
ImageRgb noise_image(int width, int height, std::uint64_t seed);

/// Separable Gaussian blur with clamped borders, kernel radius ceil(3 sigma).
ImageRgb gaussian_blur(const ImageRgb& img, double sigma);

/// In-memory paired corpus: each specimen is a uniform grey canvas with one
/// noise-textured rectangle covering `texture_share` of its area, at a seeded
/// position. The positive member is sharp, the negative member blurred.
struct GateCorpus {
  std::vector<SampleRecord> records;
  std::map<std::string, ImageRgb> images;

  ImageLoader loader() const;
};

GateCorpus make_gate_corpus(int specimens, int side, double texture_share, double blur_sigma,
                            std::uint64_t seed);

/// Writes the corpus as PNGs plus manifest.jsonl into `dir`.
std::filesystem::path write_corpus(const GateCorpus& corpus, const std::filesystem::path& dir);

/// Paired manifest with `pairs` pairs and `singles` unpaired records, no files.
std::vector<SampleRecord> synthetic_manifest(std::size_t pairs, std::size_t singles = 0);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Scorer that returns a fixed probability.
class ConstantScorer final : public QualityScorer {
 public:
  explicit ConstantScorer(double p) : p_(p) {}
  double score(const ImageRgb&) const override { return p_; }

 private:
  double p_;
};

}  // namespace cytoiqa::testing
