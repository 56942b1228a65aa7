#pragma once

#include <filesystem>

#include "cytoiqa/image.hpp"

namespace cytoiqa {

// PNG and JPEG in, PNG out. Other extensions throw kUnsupportedFormat.
bool is_supported_image(const std::filesystem::path& path);
ImageRgb read_image(const std::filesystem::path& path);
void write_png(const ImageRgb& img, const std::filesystem::path& path);

}  // namespace cytoiqa
