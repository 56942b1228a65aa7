#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cytoiqa/image.hpp"

namespace cytoiqa {

enum class EdgeMode {
  kDropPartial,  // fragments smaller than the patch are discarded
  kPadPartial,   // fragments are zero-padded up to the patch size
};

std::string_view to_string(EdgeMode mode);
std::optional<EdgeMode> parse_edge_mode(std::string_view name);

struct FragmentSpec {
  int grid_row = 0;
  int grid_col = 0;
  Region source;  // clipped to the image
  int patch_size = 0;
  // Share of the patch covered by real pixels: source.area() / patch_size^2.
  double valid_fraction = 0.0;
};

/// Top-left anchored grid of patch_size tiles in row-major order.
/// kDropPartial: floor(w/s) x floor(h/s) full tiles, kEmptyGrid if none.
/// kPadPartial: ceil(w/s) x ceil(h/s) tiles, right/bottom ones clipped.
std::vector<FragmentSpec> slice_grid(int width, int height, int patch_size, EdgeMode mode);

/// patch_size x patch_size copy of the fragment; padding is (0,0,0).
/// Throws kInconsistentSpec if the spec could not have come from slice_grid
/// on this image in this mode.
ImageRgb extract_fragment(const ImageRgb& img, const FragmentSpec& spec, EdgeMode mode);

}  // namespace cytoiqa
