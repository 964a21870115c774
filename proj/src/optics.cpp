#include "fogsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fogsim {

TransmissionMap::TransmissionMap(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_) {
    throw DataError("transmission buffer size does not match " + std::to_string(width_) + "x" +
                    std::to_string(height_));
  }
}

TransmissionMap compute_transmission(const DepthMap& depth, double beta_cam) {
  if (!(beta_cam >= 0.0) || !std::isfinite(beta_cam)) {
    throw InvalidParameterError("attenuation coefficient must be finite and >= 0, got " +
                                std::to_string(beta_cam));
  }
  const auto d = depth.data();
  std::vector<double> t(d.size());
  std::transform(d.begin(), d.end(), t.begin(),
                 [beta_cam](double z) { return std::exp(-beta_cam * z); });
  return TransmissionMap(depth.width(), depth.height(), std::move(t));
}

RgbImage apply_fog(const RgbImage& image, const TransmissionMap& transmission,
                   const AtmosphericLight& airlight) {
  if (image.width() != transmission.width() || image.height() != transmission.height()) {
    throw AlignmentError("image and transmission map dimensions differ");
  }
  const auto a = airlight.channels();
  for (double v : a) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameterError("airlight channel out of [0,1]");
  }

  RgbImage out(image.width(), image.height());
  const auto src = image.data();
  const auto t = transmission.data();
  auto dst = out.data();
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[i];
    const double haze = 1.0 - ti;
    for (std::size_t c = 0; c < 3; ++c) {
      dst[3 * i + c] = std::clamp(src[3 * i + c] * ti + a[c] * haze, 0.0, 1.0);
    }
  }
  return out;
}

CameraFogResult simulate_camera_fog(const RgbImage& image, const DepthMap& depth, double mor,
                                    const std::optional<AtmosphericLight>& airlight_override,
                                    const AirlightConfig& cfg) {
  const FogParams params = mor_to_fog_params(mor);
  if (image.width() != depth.width() || image.height() != depth.height()) {
    throw AlignmentError("image and depth dimensions differ; align them first");
  }

  CameraFogResult result;
  if (airlight_override) {
    result.airlight = *airlight_override;
  } else {
    const AirlightEstimate est = estimate_airlight(image, depth, cfg);
    result.airlight = est.light;
    result.airlight_fallback = est.raw.fallback;
  }
  result.image = apply_fog(image, compute_transmission(depth, params.beta_cam), result.airlight);
  return result;
}

}  // namespace fogsim
