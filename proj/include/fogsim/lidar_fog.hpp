#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fogsim/core.hpp"

namespace fogsim {

struct LidarSimConfig {
  double r_min = 1.5;        // m, sensor blind zone
  double range_step = 0.1;   // m, profile sampling and footprint integration step
  double noise_floor = 0.0;  // points below this intensity are dropped; 0 disables
  std::uint64_t rng_seed = 0;  // reserved, the model is deterministic
  double beta0 = kDefaultBeta0;
  double tau_h = kDefaultTauH;

  void validate() const;
};

/// Soft-target (fog backscatter) intensity sampled along one beam.
struct SoftResponseProfile {
  std::vector<double> ranges;
  std::vector<double> responses;
  double peak_range = 0.0;
  double peak_value = 0.0;

  bool empty() const { return ranges.empty(); }
};

// Energy of the sin^2 pulse (in seconds of pulse time) whose round-trip
// window overlaps scatterers beyond the blind zone, tabulated for overlaps
// of k * step metres. Pulse support is c * tau_h metres.
class PulseOverlap {
 public:
  PulseOverlap(double step, double tau_h);

  double weight(std::size_t k) const { return k < table_.size() ? table_[k] : full_; }
  double full() const { return full_; }
  // First k from which weight(k) == full().
  std::size_t saturation_index() const { return table_.size(); }

 private:
  std::vector<double> table_;
  double full_ = 0.0;
};

/// Two-way attenuated hard-target intensity i * exp(-2 alpha R).
double attenuate_hard(double intensity, double range, double alpha);

/// Backscatter profile i_soft(r) on r = r_min + k * step, r <= R. Empty when
/// R <= r_min (blind zone).
SoftResponseProfile soft_response(double intensity, double range, const FogParams& params,
                                  const LidarSimConfig& cfg = {});

struct SoftPeak {
  double range = 0.0;
  double value = 0.0;
  bool valid = false;  // false inside the blind zone
};

/// Peak of soft_response without materialising the profile. Only the
/// rising edge of the pulse overlap needs scanning: past it the response is
/// strictly decreasing in r.
SoftPeak soft_response_peak(double intensity, double range, const FogParams& params,
                            const LidarSimConfig& cfg, const PulseOverlap& overlap);

struct LidarFogStats {
  std::size_t kept_attenuated = 0;
  std::size_t relocated = 0;
  std::size_t dropped = 0;
  std::size_t blind_zone = 0;  // passed through unmodified
  double mean_intensity_before = 0.0;
  double mean_intensity_after = 0.0;  // over surviving points

  friend bool operator==(const LidarFogStats&, const LidarFogStats&) = default;
};

struct LidarFogResult {
  PointCloud cloud;
  LidarFogStats stats;
};

/// Hard/soft decomposition per point with max-power selection. Phantom
/// points move along their ray to the backscatter peak. Input order is kept.
LidarFogResult simulate_lidar_fog(const PointCloud& cloud, double mor,
                                  const LidarSimConfig& cfg = {}, unsigned workers = 1);

}  // namespace fogsim
