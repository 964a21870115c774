#include "fogsim/lidar_fog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "fogsim/parallel.hpp"

namespace fogsim {

void LidarSimConfig::validate() const {
  if (!(r_min > 0.0) || !std::isfinite(r_min)) throw InvalidParameterError("r_min must be > 0");
  if (!(range_step > 0.0) || !std::isfinite(range_step)) {
    throw InvalidParameterError("range_step must be > 0");
  }
  if (!(noise_floor >= 0.0)) throw InvalidParameterError("noise_floor must be >= 0");
  if (!(beta0 > 0.0) || !(tau_h > 0.0)) throw InvalidParameterError("beta0 and tau_h must be > 0");
}

PulseOverlap::PulseOverlap(double step, double tau_h) {
  if (!(step > 0.0) || !(tau_h > 0.0)) {
    throw InvalidParameterError("pulse overlap needs positive step and tau_h");
  }
  const double support = kSpeedOfLight * tau_h;  // metres
  const double to_time = 2.0 / kSpeedOfLight;    // du -> dt
  auto shape = [support](double u) {
    const double s = std::sin(std::numbers::pi * u / support);
    return s * s;
  };

  // Trapezoid on nodes u_j = j * step; shape(0) = 0.
  const auto last_node = static_cast<std::size_t>(std::floor(support / step));
  table_.resize(last_node + 1);
  table_[0] = 0.0;
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t j = 1; j <= last_node; ++j) {
    const double cur = shape(static_cast<double>(j) * step);
    acc += 0.5 * (prev + cur) * step;
    table_[j] = acc * to_time;
    prev = cur;
  }
  const double tail = support - static_cast<double>(last_node) * step;
  full_ = (acc + 0.5 * prev * tail) * to_time;
}

double attenuate_hard(double intensity, double range, double alpha) {
  if (!(intensity >= 0.0 && intensity <= 1.0)) {
    throw InvalidParameterError("intensity must lie in [0,1], got " + std::to_string(intensity));
  }
  if (!(range > 0.0) || !std::isfinite(range)) throw InvalidParameterError("range must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidParameterError("alpha must be >= 0");
  return intensity * std::exp(-2.0 * alpha * range);
}

namespace {

void check_soft_inputs(double intensity, double range, const FogParams& params) {
  if (!(intensity >= 0.0 && intensity <= 1.0)) {
    throw InvalidParameterError("intensity must lie in [0,1]");
  }
  if (!(range > 0.0) || !std::isfinite(range)) throw InvalidParameterError("range must be > 0");
  if (!(params.alpha >= 0.0) || !(params.beta_lidar >= 0.0) || !(params.beta0 > 0.0)) {
    throw InvalidParameterError("invalid fog parameters");
  }
}

std::size_t last_sample(double range, const LidarSimConfig& cfg) {
  return static_cast<std::size_t>(std::floor((range - cfg.r_min) / cfg.range_step + 1e-9));
}

}  // namespace

SoftResponseProfile soft_response(double intensity, double range, const FogParams& params,
                                  const LidarSimConfig& cfg) {
  cfg.validate();
  check_soft_inputs(intensity, range, params);
  SoftResponseProfile profile;
  if (range <= cfg.r_min) return profile;

  const PulseOverlap overlap(cfg.range_step, params.tau_h);
  const double gain = intensity * (params.beta_lidar / params.beta0) * range * range;
  const std::size_t samples = last_sample(range, cfg) + 1;
  profile.ranges.resize(samples);
  profile.responses.resize(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double r = cfg.r_min + static_cast<double>(k) * cfg.range_step;
    const double v = gain / (r * r) * std::exp(-2.0 * params.alpha * r) * overlap.weight(k);
    profile.ranges[k] = r;
    profile.responses[k] = v;
    if (v > profile.peak_value) {
      profile.peak_value = v;
      profile.peak_range = r;
    }
  }
  if (profile.peak_value == 0.0) profile.peak_range = profile.ranges.front();
  return profile;
}

SoftPeak soft_response_peak(double intensity, double range, const FogParams& params,
                            const LidarSimConfig& cfg, const PulseOverlap& overlap) {
  SoftPeak peak;
  if (range <= cfg.r_min) return peak;
  peak.valid = true;
  peak.range = cfg.r_min;

  const double gain = intensity * (params.beta_lidar / params.beta0) * range * range;
  const std::size_t last = std::min(last_sample(range, cfg), overlap.saturation_index());
  for (std::size_t k = 0; k <= last; ++k) {
    const double r = cfg.r_min + static_cast<double>(k) * cfg.range_step;
    const double v = gain / (r * r) * std::exp(-2.0 * params.alpha * r) * overlap.weight(k);
    if (v > peak.value) {
      peak.value = v;
      peak.range = r;
    }
  }
  return peak;
}

LidarFogResult simulate_lidar_fog(const PointCloud& cloud, double mor, const LidarSimConfig& cfg,
                                  unsigned workers) {
  cfg.validate();
  cloud.validate();
  const FogParams params = mor_to_fog_params(mor, cfg.beta0, cfg.tau_h);
  const PulseOverlap overlap(cfg.range_step, params.tau_h);

  enum class Outcome : unsigned char { kBlind, kAttenuated, kRelocated, kDropped };
  const std::size_t n = cloud.size();
  std::vector<LidarPoint> moved(n);
  std::vector<Outcome> outcome(n);

  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    const std::size_t end = std::min(n, (chunk + 1) * kChunk);
    for (std::size_t i = chunk * kChunk; i < end; ++i) {
      const LidarPoint& p = cloud.points[i];
      const double range = p.range();
      if (range <= cfg.r_min) {
        moved[i] = p;
        outcome[i] = Outcome::kBlind;
        continue;
      }
      const double hard = attenuate_hard(p.intensity, range, params.alpha);
      const SoftPeak soft = soft_response_peak(p.intensity, range, params, cfg, overlap);
      LidarPoint q = p;
      if (soft.value > hard) {
        const double scale = soft.range / range;
        q.x = p.x * scale;
        q.y = p.y * scale;
        q.z = p.z * scale;
        q.intensity = std::min(1.0, soft.value);
        outcome[i] = Outcome::kRelocated;
      } else {
        q.intensity = hard;
        outcome[i] = Outcome::kAttenuated;
      }
      if (cfg.noise_floor > 0.0 && q.intensity < cfg.noise_floor) outcome[i] = Outcome::kDropped;
      moved[i] = q;
    }
  });

  LidarFogResult result;
  auto& stats = result.stats;
  result.cloud.points.reserve(n);
  double sum_before = 0.0;
  double sum_after = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_before += cloud.points[i].intensity;
    switch (outcome[i]) {
      case Outcome::kBlind: ++stats.blind_zone; break;
      case Outcome::kAttenuated: ++stats.kept_attenuated; break;
      case Outcome::kRelocated: ++stats.relocated; break;
      case Outcome::kDropped: ++stats.dropped; continue;
    }
    sum_after += moved[i].intensity;
    result.cloud.points.push_back(moved[i]);
  }
  if (n > 0) stats.mean_intensity_before = sum_before / static_cast<double>(n);
  if (!result.cloud.empty()) {
    stats.mean_intensity_after = sum_after / static_cast<double>(result.cloud.size());
  }
  return result;
}

}  // namespace fogsim
