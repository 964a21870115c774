#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fogsim {

// Error hierarchy. Everything thrown by the library derives from FogError.
class FogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameterError : public FogError {
 public:
  using FogError::FogError;
};

class AlignmentError : public FogError {
 public:
  using FogError::FogError;
};

class DataError : public FogError {
 public:
  using FogError::FogError;
};

class InputError : public FogError {
 public:
  using FogError::FogError;
};

/// Row-major H x W x 3 image with normalized sRGB channels in [0,1].
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t width, std::size_t height, double fill = 0.0);
  RgbImage(std::size_t width, std::size_t height, std::vector<double> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t row, std::size_t col, std::size_t channel) {
    return data_[(row * width_ + col) * 3 + channel];
  }
  double at(std::size_t row, std::size_t col, std::size_t channel) const {
    return data_[(row * width_ + col) * 3 + channel];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Throws DataError if any channel lies outside [0,1] or is not finite.
  void validate() const;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// Row-major H x W metric depths in meters. Values must be finite and > 0.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(std::size_t width, std::size_t height, double fill = 1.0);
  DepthMap(std::size_t width, std::size_t height, std::vector<double> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }

  double& at(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Throws DataError naming the first offending pixel (row, col).
  void validate() const;

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;

  double range() const;

  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

/// Point cloud in sensor coordinates; the sensor sits at the origin.
struct PointCloud {
  std::vector<LidarPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws DataError on non-finite coordinates, zero range or intensity
  /// outside [0,1].
  void validate() const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

// LiDAR calibration constants for the fog model.
inline constexpr double kSpeedOfLight = 2.99792458e8;          // m/s
inline constexpr double kDefaultBeta0 = 1e-6 / 3.14159265358979323846;  // sr^-1
inline constexpr double kDefaultTauH = 20e-9;                  // s
inline constexpr double kLidarBackscatterScale = 0.046;        // beta = 0.046 / MOR
inline constexpr double kMorExtinctionScale = 3.0;             // beta = 3 / MOR
inline constexpr double kFogMorThreshold = 1000.0;             // fog iff MOR < 1 km

/// Visibility and the camera and LiDAR coefficients derived from it.
struct FogParams {
  double mor = 0.0;         // m
  double beta_cam = 0.0;    // m^-1
  double alpha = 0.0;       // m^-1
  double beta_lidar = 0.0;  // m^-1 sr^-1
  double beta0 = kDefaultBeta0;
  double tau_h = kDefaultTauH;

  /// True when the visibility counts as fog (MOR <= 1 km).
  bool is_fog() const { return mor <= kFogMorThreshold; }
};

FogParams mor_to_fog_params(double mor);
FogParams mor_to_fog_params(double mor, double beta0, double tau_h);

/// Atmospheric light A. After estimation r == g == b.
struct AtmosphericLight {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  double luminance() const;
  std::array<double, 3> channels() const { return {r, g, b}; }

  static AtmosphericLight neutral(double value) { return {value, value, value}; }

  friend bool operator==(const AtmosphericLight&, const AtmosphericLight&) = default;
};

/// Checks an image/depth pair and resamples the depth to the image
/// resolution (nearest neighbor) when needed. Aspect ratios must agree
/// within 1%.
std::pair<RgbImage, DepthMap> validate_pair(const RgbImage& image, const DepthMap& depth);

/// Nearest-neighbor resampling of a depth map to width x height.
DepthMap resample_nearest(const DepthMap& depth, std::size_t width, std::size_t height);

}  // namespace fogsim
