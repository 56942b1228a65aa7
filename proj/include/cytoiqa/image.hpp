#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cytoiqa {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Axis-aligned pixel rectangle, top-left anchored.
struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }

  friend bool operator==(const Region&, const Region&) = default;
};

/// Owned 8-bit RGB raster, row-major, interleaved r,g,b.
class ImageRgb {
 public:
  /// Black image. Throws kInvalidSize unless width, height >= 1.
  ImageRgb(int width, int height);
  ImageRgb(int width, int height, Rgb fill);
  /// Takes ownership of an interleaved buffer of exactly width*height*3 bytes.
  ImageRgb(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  Region bounds() const { return {0, 0, width_, height_}; }
  bool contains(const Region& region) const;

  Rgb at(int x, int y) const {
    const std::uint8_t* p = &pixels_[index(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb value) {
    std::uint8_t* p = &pixels_[index(x, y)];
    p[0] = value.r;
    p[1] = value.g;
    p[2] = value.b;
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }
  std::span<const std::uint8_t> row(int y) const {
    return std::span(pixels_).subspan(index(0, y), static_cast<std::size_t>(width_) * 3);
  }
  std::span<std::uint8_t> row(int y) {
    return std::span(pixels_).subspan(index(0, y), static_cast<std::size_t>(width_) * 3);
  }

  friend bool operator==(const ImageRgb&, const ImageRgb&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace cytoiqa
