#include "simuda/datakit/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "simuda/core/errors.hpp"
#include "cv_interop.hpp"

namespace simuda::datakit {

cv::Mat to_mat(const Image& image) {
  cv::Mat m(image.height, image.width, CV_8UC3);
  std::copy(image.pixels.begin(), image.pixels.end(), m.data);
  return m;
}

Image from_mat(const cv::Mat& mat) {
  cv::Mat m = mat.isContinuous() ? mat : mat.clone();
  Image out(m.rows, m.cols);
  std::copy(m.data, m.data + out.pixels.size(), out.pixels.begin());
  return out;
}

Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw DataError("cannot decode image '" + path.string() + "': " + e.what());
  }
  if (bgr.empty()) throw DataError("cannot decode image '" + path.string() + "'");
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return from_mat(rgb);
}

void save_image(const std::filesystem::path& path, const Image& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  cv::Mat bgr;
  cv::cvtColor(to_mat(image), bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw DataError("cannot encode image '" + path.string() + "': " + e.what());
  }
  if (!ok) throw DataError("cannot encode image '" + path.string() + "'");
}

Image resize(const Image& image, int height, int width) {
  if (image.height == height && image.width == width) return image;
  cv::Mat out;
  const bool shrinking = height < image.height && width < image.width;
  cv::resize(to_mat(image), out, cv::Size(width, height), 0, 0, shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  return from_mat(out);
}

}  // namespace simuda::datakit
