#include "cytoiqa/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "cytoiqa/error.hpp"

namespace cytoiqa {

bool is_supported_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

ImageRgb read_image(const std::filesystem::path& path) {
  if (!is_supported_image(path)) {
    throw Error(ErrorCode::kUnsupportedFormat, "not a PNG or JPEG file: " + path.string());
  }
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kIo, "cannot decode " + path.string() + ": " + e.what());
  }
  if (bgr.empty()) throw Error(ErrorCode::kIo, "cannot read image " + path.string());

  ImageRgb out(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* src = bgr.ptr<std::uint8_t>(y);
    auto dst = out.row(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const std::size_t i = static_cast<std::size_t>(x) * 3;
      dst[i] = src[i + 2];
      dst[i + 1] = src[i + 1];
      dst[i + 2] = src[i];
    }
  }
  return out;
}

void write_png(const ImageRgb& img, const std::filesystem::path& path) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    const auto src = img.row(y);
    auto* dst = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(x) * 3;
      dst[i] = src[i + 2];
      dst[i + 1] = src[i + 1];
      dst[i + 2] = src[i];
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr, std::vector<int>{cv::IMWRITE_PNG_COMPRESSION, 3});
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace cytoiqa
