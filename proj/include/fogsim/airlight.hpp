#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "fogsim/core.hpp"

namespace fogsim {

/// Settings for the depth-filtered dark channel prior.
struct AirlightConfig {
  double depth_threshold = 1000.0;   // m; only pixels strictly farther are candidates
  int dark_channel_patch = 15;       // odd window side in pixels
  double candidate_fraction = 0.001; // top share of candidates by dark channel
  double lum_low = 0.6374;           // daytime fog luminance range
  double lum_high = 0.8555;

  void validate() const;
};

/// ITU-R BT.709 relative luminance. Channels must lie in [0,1].
double bt709_luminance(double r, double g, double b);

struct RawAirlight {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  std::size_t row = 0;  // location of the selected pixel
  std::size_t col = 0;
  bool fallback = false;  // no pixel beyond the depth threshold

  std::array<double, 3> channels() const { return {r, g, b}; }
};

/// Per-pixel min over channels followed by a square min filter of side
/// `patch` (window clamped at the borders). Row-major, width x height.
std::vector<double> dark_channel(const RgbImage& image, int patch);

/// Dark channel prior restricted to pixels beyond cfg.depth_threshold.
/// Without a depth map (or with no candidates) the whole image is used.
RawAirlight estimate_airlight_raw(const RgbImage& image, const DepthMap* depth,
                                  const AirlightConfig& cfg = {});

inline RawAirlight estimate_airlight_raw(const RgbImage& image, const DepthMap& depth,
                                         const AirlightConfig& cfg = {}) {
  return estimate_airlight_raw(image, &depth, cfg);
}

/// Clips the luminance of a raw estimate to [lum_low, lum_high] and spreads
/// it over all three channels.
AtmosphericLight clip_airlight(double r, double g, double b, const AirlightConfig& cfg = {});

struct AirlightEstimate {
  AtmosphericLight light;
  RawAirlight raw;
};

AirlightEstimate estimate_airlight(const RgbImage& image, const DepthMap& depth,
                                   const AirlightConfig& cfg = {});

struct CorpusEntry {
  RgbImage image;
  std::optional<DepthMap> depth;
};

struct CorpusStats {
  std::vector<RawAirlight> estimates;  // per image, corpus order
  double mean_r = 0.0;
  double mean_g = 0.0;
  double mean_b = 0.0;
  double mean_luminance = 0.0;  // luminance of the mean vector
  double channel_spread = 0.0;  // max |mean_ci - mean_cj|
};

/// Raw airlight per image (depth-filtered when a depth map is present),
/// aggregated into channel means. Images are estimated with `workers`
/// threads and reduced in corpus order.
CorpusStats corpus_airlight_stats(std::span<const CorpusEntry> corpus,
                                  const AirlightConfig& cfg = {}, unsigned workers = 1);

}  // namespace fogsim
