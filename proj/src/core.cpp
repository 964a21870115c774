#include "fogsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fogsim {

namespace {

void check_size(std::size_t width, std::size_t height, std::size_t channels, std::size_t got) {
  if (width * height * channels != got) {
    throw DataError("buffer holds " + std::to_string(got) + " values, expected " +
                    std::to_string(width) + "x" + std::to_string(height) + "x" +
                    std::to_string(channels));
  }
}

}  // namespace

RgbImage::RgbImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height * 3, fill) {}

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_size(width_, height_, 3, data_.size());
}

void RgbImage::validate() const {
  check_size(width_, height_, 3, data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double v = data_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      const std::size_t px = i / 3;
      throw DataError("image channel out of [0,1] at row " + std::to_string(px / width_) +
                      ", col " + std::to_string(px % width_));
    }
  }
}

DepthMap::DepthMap(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {}

DepthMap::DepthMap(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_size(width_, height_, 1, data_.size());
}

void DepthMap::validate() const {
  check_size(width_, height_, 1, data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double d = data_[i];
    if (!std::isfinite(d) || d <= 0.0) {
      throw DataError("invalid depth at row " + std::to_string(i / width_) + ", col " +
                      std::to_string(i % width_));
    }
  }
}

double LidarPoint::range() const { return std::sqrt(x * x + y * y + z * z); }

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw DataError("non-finite coordinates at point " + std::to_string(i));
    }
    if (!(p.range() > 0.0)) {
      throw DataError("zero range at point " + std::to_string(i));
    }
    if (!(p.intensity >= 0.0 && p.intensity <= 1.0)) {
      throw DataError("intensity out of [0,1] at point " + std::to_string(i));
    }
  }
}

FogParams mor_to_fog_params(double mor) {
  return mor_to_fog_params(mor, kDefaultBeta0, kDefaultTauH);
}

FogParams mor_to_fog_params(double mor, double beta0, double tau_h) {
  if (!std::isfinite(mor) || mor <= 0.0) {
    throw InvalidParameterError("visibility must be positive and finite, got " +
                                std::to_string(mor));
  }
  if (!std::isfinite(beta0) || beta0 <= 0.0 || !std::isfinite(tau_h) || tau_h <= 0.0) {
    throw InvalidParameterError("beta0 and tau_h must be positive and finite");
  }
  FogParams p;
  p.mor = mor;
  p.beta_cam = kMorExtinctionScale / mor;
  p.alpha = kMorExtinctionScale / mor;
  p.beta_lidar = kLidarBackscatterScale / mor;
  p.beta0 = beta0;
  p.tau_h = tau_h;
  return p;
}

double AtmosphericLight::luminance() const { return 0.2126 * r + 0.7152 * g + 0.0722 * b; }

DepthMap resample_nearest(const DepthMap& depth, std::size_t width, std::size_t height) {
  if (depth.width() == width && depth.height() == height) return depth;
  DepthMap out(width, height);
  const std::size_t sw = depth.width();
  const std::size_t sh = depth.height();
  std::vector<std::size_t> col_map(width);
  for (std::size_t c = 0; c < width; ++c) {
    col_map[c] = std::min(sw - 1, (2 * c + 1) * sw / (2 * width));
  }
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t sr = std::min(sh - 1, (2 * r + 1) * sh / (2 * height));
    for (std::size_t c = 0; c < width; ++c) out.at(r, c) = depth.at(sr, col_map[c]);
  }
  return out;
}

std::pair<RgbImage, DepthMap> validate_pair(const RgbImage& image, const DepthMap& depth) {
  if (image.width() == 0 || image.height() == 0 || depth.width() == 0 || depth.height() == 0) {
    throw AlignmentError("empty image or depth map");
  }
  image.validate();
  depth.validate();
  if (image.width() == depth.width() && image.height() == depth.height()) {
    return {image, depth};
  }
  const double image_aspect = static_cast<double>(image.width()) / image.height();
  const double depth_aspect = static_cast<double>(depth.width()) / depth.height();
  if (std::abs(image_aspect / depth_aspect - 1.0) > 0.01) {
    throw AlignmentError("aspect ratio mismatch: image " + std::to_string(image.width()) + "x" +
                         std::to_string(image.height()) + ", depth " +
                         std::to_string(depth.width()) + "x" + std::to_string(depth.height()));
  }
  return {image, resample_nearest(depth, image.width(), image.height())};
}

}  // namespace fogsim
