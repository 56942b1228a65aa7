#include "cytoiqa/slicing.hpp"

#include <algorithm>
#include <string>

#include "cytoiqa/error.hpp"

namespace cytoiqa {

std::string_view to_string(EdgeMode mode) {
  return mode == EdgeMode::kDropPartial ? "drop_partial" : "pad_partial";
}

std::optional<EdgeMode> parse_edge_mode(std::string_view name) {
  if (name == "drop_partial" || name == "drop") return EdgeMode::kDropPartial;
  if (name == "pad_partial" || name == "pad") return EdgeMode::kPadPartial;
  return std::nullopt;
}

std::vector<FragmentSpec> slice_grid(int width, int height, int patch_size, EdgeMode mode) {
  if (patch_size < 1) throw Error(ErrorCode::kInvalidSize, "patch size must be >= 1");
  if (width < 1 || height < 1) throw Error(ErrorCode::kInvalidSize, "image must be non-empty");

  const bool pad = mode == EdgeMode::kPadPartial;
  const int cols = pad ? (width + patch_size - 1) / patch_size : width / patch_size;
  const int rows = pad ? (height + patch_size - 1) / patch_size : height / patch_size;
  if (cols == 0 || rows == 0) {
    throw Error(ErrorCode::kEmptyGrid, "patch " + std::to_string(patch_size) +
                                           " larger than image " + std::to_string(width) + "x" +
                                           std::to_string(height));
  }

  const double patch_area = static_cast<double>(patch_size) * patch_size;
  std::vector<FragmentSpec> specs;
  specs.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int x = c * patch_size;
      const int y = r * patch_size;
      const Region src{x, y, std::min(patch_size, width - x), std::min(patch_size, height - y)};
      specs.push_back({r, c, src, patch_size, static_cast<double>(src.area()) / patch_area});
    }
  }
  return specs;
}

ImageRgb extract_fragment(const ImageRgb& img, const FragmentSpec& spec, EdgeMode mode) {
  const int s = spec.patch_size;
  const Region& src = spec.source;
  const bool consistent =
      s >= 1 && spec.grid_row >= 0 && spec.grid_col >= 0 && src.x == spec.grid_col * s &&
      src.y == spec.grid_row * s && src.x < img.width() && src.y < img.height() &&
      src.w == std::min(s, img.width() - src.x) && src.h == std::min(s, img.height() - src.y) &&
      (mode == EdgeMode::kPadPartial || (src.w == s && src.h == s));
  if (!consistent) {
    throw Error(ErrorCode::kInconsistentSpec,
                "fragment (" + std::to_string(spec.grid_row) + "," +
                    std::to_string(spec.grid_col) + ") does not belong to a " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " image in " + std::string(to_string(mode)) + " mode");
  }

  ImageRgb out(s, s);
  for (int y = 0; y < src.h; ++y) {
    const auto line = img.row(src.y + y).subspan(static_cast<std::size_t>(src.x) * 3,
                                                  static_cast<std::size_t>(src.w) * 3);
    std::copy(line.begin(), line.end(), out.row(y).begin());
  }
  return out;
}

}  // namespace cytoiqa
