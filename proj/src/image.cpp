#include "cytoiqa/image.hpp"

#include <string>

#include "cytoiqa/error.hpp"

namespace cytoiqa {
namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidSize,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

std::size_t buffer_size(int width, int height) {
  check_dims(width, height);
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
}

}  // namespace

ImageRgb::ImageRgb(int width, int height)
    : width_(width), height_(height), pixels_(buffer_size(width, height), 0) {}

ImageRgb::ImageRgb(int width, int height, Rgb fill) : ImageRgb(width, height) {
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

ImageRgb::ImageRgb(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != buffer_size(width, height)) {
    throw Error(ErrorCode::kInvalidSize, "pixel buffer length " + std::to_string(pixels_.size()) +
                                             " does not match " + std::to_string(width) + "x" +
                                             std::to_string(height) + "x3");
  }
}

bool ImageRgb::contains(const Region& r) const {
  return r.w >= 1 && r.h >= 1 && r.x >= 0 && r.y >= 0 && r.x <= width_ - r.w &&
         r.y <= height_ - r.h;
}

}  // namespace cytoiqa
