#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fogsim/airlight.hpp"
#include "fogsim/core.hpp"

namespace fogsim {

// Per-pixel transmission t(x) in (0,1].
class TransmissionMap {
 public:
  TransmissionMap() = default;
  TransmissionMap(std::size_t width, std::size_t height, std::vector<double> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// t(x) = exp(-beta_cam * d(x)) for homogeneous fog.
TransmissionMap compute_transmission(const DepthMap& depth, double beta_cam);

/// Koschmieder blend I = J t + A (1 - t), clamped to [0,1].
RgbImage apply_fog(const RgbImage& image, const TransmissionMap& transmission,
                   const AtmosphericLight& airlight);

struct CameraFogResult {
  RgbImage image;
  AtmosphericLight airlight;
  bool airlight_fallback = false;  // estimation found no far pixels
};

/// Full camera branch: estimates A unless an override is given, then
/// computes the transmission from the visibility and blends.
CameraFogResult simulate_camera_fog(const RgbImage& image, const DepthMap& depth, double mor,
                                    const std::optional<AtmosphericLight>& airlight_override = {},
                                    const AirlightConfig& cfg = {});

}  // namespace fogsim
