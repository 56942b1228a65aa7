#include "cytoiqa/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cytoiqa/error.hpp"
#include "cytoiqa/rng.hpp"

namespace cytoiqa {
namespace {

void require_region(const ImageRgb& img, const Region& region) {
  if (!img.contains(region)) {
    throw Error(ErrorCode::kOutOfBounds,
                "region (" + std::to_string(region.x) + "," + std::to_string(region.y) + " " +
                    std::to_string(region.w) + "x" + std::to_string(region.h) +
                    ") outside image " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()));
  }
}

}  // namespace

double rgb_channel_variance(const ImageRgb& img, const Region& region) {
  require_region(img, region);
  // Integer sums keep the statistic exact and independent of pixel order.
  std::array<std::uint64_t, 3> sum{};
  std::array<std::uint64_t, 3> sum_sq{};
  for (int y = region.y; y < region.y + region.h; ++y) {
    const auto row = img.row(y);
    for (int x = region.x; x < region.x + region.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const std::uint64_t v = row[static_cast<std::size_t>(x) * 3 + c];
        sum[c] += v;
        sum_sq[c] += v * v;
      }
    }
  }
  const auto n = static_cast<unsigned __int128>(region.area());
  const double denom = static_cast<double>(region.area()) * static_cast<double>(region.area()) *
                       255.0 * 255.0;
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const unsigned __int128 num =
        n * sum_sq[c] - static_cast<unsigned __int128>(sum[c]) * sum[c];
    total += static_cast<double>(num) / denom;
  }
  return total / 3.0;
}

double saturation_variance(const ImageRgb& img, const Region& region) {
  require_region(img, region);
  std::vector<double> sat;
  sat.reserve(static_cast<std::size_t>(region.area()));
  for (int y = region.y; y < region.y + region.h; ++y) {
    for (int x = region.x; x < region.x + region.w; ++x) {
      const Rgb p = img.at(x, y);
      const int hi = std::max({p.r, p.g, p.b});
      const int lo = std::min({p.r, p.g, p.b});
      sat.push_back(hi == 0 ? 0.0 : static_cast<double>(hi - lo) / hi);
    }
  }
  // Shifted by the first sample so a constant region yields exactly 0.
  const double shift = sat.front();
  double mean = 0.0;
  for (double s : sat) mean += s - shift;
  mean /= static_cast<double>(sat.size());
  double acc = 0.0;
  for (double s : sat) acc += (s - shift - mean) * (s - shift - mean);
  return acc / static_cast<double>(sat.size());
}

ImageRgb resize_bilinear(const ImageRgb& img, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1) {
    throw Error(ErrorCode::kInvalidSize, "resize target must be at least 1x1");
  }
  if (target_w == img.width() && target_h == img.height()) return img;

  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [](int src, int dst) {
    std::vector<Tap> out(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      double s = (i + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(src - 1));
      const int lo = static_cast<int>(std::floor(s));
      const int hi = std::min(lo + 1, src - 1);
      out[static_cast<std::size_t>(i)] = {lo, hi, s - lo};
    }
    return out;
  };
  const auto xs = taps(img.width(), target_w);
  const auto ys = taps(img.height(), target_h);

  ImageRgb out(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    const auto r0 = img.row(ty.lo);
    const auto r1 = img.row(ty.hi);
    auto dst = out.row(y);
    for (int x = 0; x < target_w; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      const std::size_t a = static_cast<std::size_t>(tx.lo) * 3;
      const std::size_t b = static_cast<std::size_t>(tx.hi) * 3;
      for (int c = 0; c < 3; ++c) {
        const double top = r0[a + c] + (r0[b + c] - r0[a + c]) * tx.frac;
        const double bottom = r1[a + c] + (r1[b + c] - r1[a + c]) * tx.frac;
        const double v = top + (bottom - top) * ty.frac;
        dst[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

ImageRgb crop(const ImageRgb& img, const Region& region) {
  require_region(img, region);
  ImageRgb out(region.w, region.h);
  for (int y = 0; y < region.h; ++y) {
    const auto src = img.row(region.y + y).subspan(static_cast<std::size_t>(region.x) * 3,
                                                    static_cast<std::size_t>(region.w) * 3);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

Region random_crop_region(int width, int height, int size, std::uint64_t seed) {
  if (size < 1 || size > width || size > height) {
    throw Error(ErrorCode::kInvalidSize, "crop size " + std::to_string(size) +
                                             " does not fit " + std::to_string(width) + "x" +
                                             std::to_string(height));
  }
  SeededRng rng(seed);
  const int x = static_cast<int>(rng.between(0, width - size));
  const int y = static_cast<int>(rng.between(0, height - size));
  return {x, y, size, size};
}

ImageRgb random_crop(const ImageRgb& img, int size, std::uint64_t seed) {
  return crop(img, random_crop_region(img.width(), img.height(), size, seed));
}

void VignetteParams::validate() const {
  const bool ok = radius_fraction > 0.0 && radius_fraction <= 1.0 && feather_fraction >= 0.0 &&
                  feather_fraction < 0.5 && radius_fraction + feather_fraction <= 1.0 &&
                  floor_level >= 0.0 && floor_level <= 1.0;
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "vignette needs radius in (0,1], feather in [0,0.5), radius+feather <= 1 and "
                "floor in [0,1]");
  }
}

double vignette_gain(double d, const VignetteParams& params) {
  const double inner = params.radius_fraction;
  const double outer = params.radius_fraction + params.feather_fraction;
  if (d <= inner) return 1.0;
  if (d >= outer) return params.floor_level;
  const double t = (d - inner) / (outer - inner);
  return 1.0 + (params.floor_level - 1.0) * t;
}

ImageRgb synthesize_dark_edges(const ImageRgb& img, const VignetteParams& params) {
  params.validate();
  const double cx = img.width() / 2.0;
  const double cy = img.height() / 2.0;
  const double half = std::min(img.width(), img.height()) / 2.0;
  ImageRgb out = img;
  for (int y = 0; y < img.height(); ++y) {
    auto row = out.row(y);
    const double dy = (y + 0.5) - cy;
    for (int x = 0; x < img.width(); ++x) {
      const double dx = (x + 0.5) - cx;
      const double gain = vignette_gain(std::hypot(dx, dy) / half, params);
      if (gain == 1.0) continue;
      for (int c = 0; c < 3; ++c) {
        auto& v = row[static_cast<std::size_t>(x) * 3 + c];
        v = static_cast<std::uint8_t>(std::clamp(std::lround(v * gain), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace cytoiqa
