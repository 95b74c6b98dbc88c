#pragma once

#include <opencv2/core.hpp>

#include "simuda/datakit/image.hpp"

namespace simuda::datakit {

// Internal bridge to OpenCV; Image stays the public pixel type.
cv::Mat to_mat(const Image& image);
Image from_mat(const cv::Mat& mat);

}  // namespace simuda::datakit
