#pragma once

#include <cstdint>

#include "cytoiqa/image.hpp"

namespace cytoiqa {

// Statistics normalize channels to [0,1] and use population variance.

/// Mean over r,g,b of the per-channel variance inside `region`.
/// Throws kOutOfBounds if the region is empty or leaves the image.
double rgb_channel_variance(const ImageRgb& img, const Region& region);

/// Variance of HSV saturation (max-min)/max inside `region`; S = 0 where max = 0.
double saturation_variance(const ImageRgb& img, const Region& region);

/// Bilinear resize with half-pixel-centre alignment and edge clamping.
ImageRgb resize_bilinear(const ImageRgb& img, int target_w, int target_h);

/// Copy of `region`. Throws kOutOfBounds if it does not fit.
ImageRgb crop(const ImageRgb& img, const Region& region);

/// Top-left offset of a size x size crop drawn uniformly from the valid range.
Region random_crop_region(int width, int height, int size, std::uint64_t seed);

/// Square crop at a seeded uniform offset. Throws kInvalidSize if size exceeds
/// either dimension or is < 1.
ImageRgb random_crop(const ImageRgb& img, int size, std::uint64_t seed);

struct VignetteParams {
  double radius_fraction = 0.9;
  double feather_fraction = 0.05;
  double floor_level = 0.0;
  // Reserved; the radial mask itself is deterministic.
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument when any knob is out of range.
  void validate() const;
};

/// Darkens everything outside a centred circle. Distances are measured from
/// the image centre in units of min(w,h)/2. Inside radius_fraction pixels are
/// untouched, beyond radius+feather they are scaled by floor_level, and the
/// band between ramps linearly.
ImageRgb synthesize_dark_edges(const ImageRgb& img, const VignetteParams& params);

/// Multiplier the vignette applies at normalized distance `d`.
double vignette_gain(double d, const VignetteParams& params);

}  // namespace cytoiqa
