#include "support/fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unistd.h>

#include "cytoiqa/error.hpp"
#include "cytoiqa/image_io.hpp"
#include "cytoiqa/rng.hpp"
#include "cytoiqa/serialization.hpp"

namespace cytoiqa::testing {

ImageRgb noise_image(int width, int height, std::uint64_t seed) {
  SeededRng rng(seed);
  ImageRgb img(width, height);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

ImageRgb gaussian_blur(const ImageRgb& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;

  const int w = img.width();
  const int h = img.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sx = std::clamp(x + i, 0, w - 1);
          acc += kernel[static_cast<std::size_t>(i + radius)] *
                 img.row(y)[static_cast<std::size_t>(sx) * 3 + c];
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
      }
    }
  }
  ImageRgb out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sy = std::clamp(y + i, 0, h - 1);
          acc += kernel[static_cast<std::size_t>(i + radius)] *
                 tmp[(static_cast<std::size_t>(sy) * w + x) * 3 + c];
        }
        out.row(y)[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
    }
  }
  return out;
}

ImageLoader GateCorpus::loader() const {
  return [this](const SampleRecord& r) {
    const auto it = images.find(r.sample_id);
    if (it == images.end()) throw Error(ErrorCode::kIo, "no such fixture " + r.sample_id);
    return it->second;
  };
}

GateCorpus make_gate_corpus(int specimens, int side, double texture_share, double blur_sigma,
                            std::uint64_t seed) {
  GateCorpus corpus;
  SeededRng rng(seed);
  // Texture rectangle with 5:4 aspect covering texture_share of the canvas.
  const double area = texture_share * side * side;
  const int tw = std::min(side, static_cast<int>(std::lround(std::sqrt(area * 1.25))));
  const int th = std::min(side, static_cast<int>(std::lround(area / tw)));
  for (int s = 0; s < specimens; ++s) {
    ImageRgb img(side, side, Rgb{128, 128, 128});
    const ImageRgb texture = noise_image(tw, th, rng.next());
    const int ox = static_cast<int>(rng.between(0, side - tw));
    const int oy = static_cast<int>(rng.between(0, side - th));
    for (int y = 0; y < th; ++y) {
      for (int x = 0; x < tw; ++x) img.set(ox + x, oy + y, texture.at(x, y));
    }
    char name[32];
    std::snprintf(name, sizeof name, "specimen%04d", s);
    const std::string pair = name;
    corpus.records.push_back(
        {"hq/" + pair, pair, Label::kPositive, Origin::kOriginal, "hq_" + pair + ".png"});
    corpus.records.push_back(
        {"lq/" + pair, pair, Label::kNegative, Origin::kOriginal, "lq_" + pair + ".png"});
    corpus.images.emplace("lq/" + pair, gaussian_blur(img, blur_sigma));
    corpus.images.emplace("hq/" + pair, std::move(img));
  }
  return corpus;
}

std::filesystem::path write_corpus(const GateCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& r : corpus.records) write_png(corpus.images.at(r.sample_id), dir / r.path);
  const auto manifest = dir / "manifest.jsonl";
  write_manifest(manifest, corpus.records);
  return manifest;
}

std::vector<SampleRecord> synthetic_manifest(std::size_t pairs, std::size_t singles) {
  std::vector<SampleRecord> out;
  out.reserve(pairs * 2 + singles);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::string id = "p" + std::to_string(i);
    out.push_back({"hq/" + id, id, Label::kPositive, Origin::kOriginal, id + "_hq.png"});
    out.push_back({"lq/" + id, id, Label::kNegative, Origin::kOriginal, id + "_lq.png"});
  }
  for (std::size_t i = 0; i < singles; ++i) {
    const std::string id = "s" + std::to_string(i);
    out.push_back({id, std::nullopt, i % 2 ? Label::kPositive : Label::kNegative,
                   Origin::kDistractor, id + ".png"});
  }
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("cytoiqa_" + tag + "_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace cytoiqa::testing
