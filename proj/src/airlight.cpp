#include "fogsim/airlight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fogsim/parallel.hpp"

namespace fogsim {

void AirlightConfig::validate() const {
  if (!(depth_threshold >= 0.0) || !std::isfinite(depth_threshold)) {
    throw InvalidParameterError("depth_threshold must be finite and >= 0");
  }
  if (dark_channel_patch < 1 || dark_channel_patch % 2 == 0) {
    throw InvalidParameterError("dark_channel_patch must be odd and >= 1, got " +
                                std::to_string(dark_channel_patch));
  }
  if (!(candidate_fraction > 0.0 && candidate_fraction <= 1.0)) {
    throw InvalidParameterError("candidate_fraction must lie in (0,1]");
  }
  if (!(lum_low > 0.0 && lum_low <= lum_high && lum_high <= 1.0)) {
    throw InvalidParameterError("luminance bounds must satisfy 0 < low <= high <= 1");
  }
}

double bt709_luminance(double r, double g, double b) {
  for (double v : {r, g, b}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidParameterError("channel value out of [0,1]: " + std::to_string(v));
    }
  }
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

std::vector<double> dark_channel(const RgbImage& image, int patch) {
  if (patch < 1 || patch % 2 == 0) {
    throw InvalidParameterError("dark channel patch must be odd and >= 1");
  }
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  const auto px = image.data();

  std::vector<double> mins(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    mins[i] = std::min({px[3 * i], px[3 * i + 1], px[3 * i + 2]});
  }
  const std::size_t radius = static_cast<std::size_t>(patch / 2);
  if (radius == 0) return mins;

  // Separable min filter: rows, then columns.
  std::vector<double> horiz(w * h);
  for (std::size_t r = 0; r < h; ++r) {
    const double* src = &mins[r * w];
    double* dst = &horiz[r * w];
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t lo = c > radius ? c - radius : 0;
      const std::size_t hi = std::min(w - 1, c + radius);
      double m = src[lo];
      for (std::size_t k = lo + 1; k <= hi; ++k) m = std::min(m, src[k]);
      dst[c] = m;
    }
  }
  std::vector<double> out(w * h);
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t lo = r > radius ? r - radius : 0;
    const std::size_t hi = std::min(h - 1, r + radius);
    double* dst = &out[r * w];
    std::copy_n(&horiz[lo * w], w, dst);
    for (std::size_t k = lo + 1; k <= hi; ++k) {
      const double* src = &horiz[k * w];
      for (std::size_t c = 0; c < w; ++c) dst[c] = std::min(dst[c], src[c]);
    }
  }
  return out;
}

RawAirlight estimate_airlight_raw(const RgbImage& image, const DepthMap* depth,
                                  const AirlightConfig& cfg) {
  cfg.validate();
  if (image.pixel_count() == 0) throw InputError("cannot estimate airlight of an empty image");
  if (depth && (depth->width() != image.width() || depth->height() != image.height())) {
    throw AlignmentError("depth map must match image dimensions for airlight estimation");
  }

  const std::vector<double> dark = dark_channel(image, cfg.dark_channel_patch);
  const std::size_t n = image.pixel_count();

  std::vector<std::size_t> candidates;
  if (depth) {
    const auto d = depth->data();
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] > cfg.depth_threshold) candidates.push_back(i);
    }
  }
  RawAirlight result;
  if (candidates.empty()) {
    // Unfiltered prior; flagged when a depth map was supposed to filter.
    result.fallback = depth != nullptr;
    candidates.resize(n);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }

  const std::size_t keep = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(cfg.candidate_fraction * candidates.size() - 1e-9)), 1,
      candidates.size());
  auto by_dark = [&](std::size_t a, std::size_t b) {
    return dark[a] != dark[b] ? dark[a] > dark[b] : a < b;
  };
  std::nth_element(candidates.begin(), candidates.begin() + (keep - 1), candidates.end(), by_dark);

  const auto px = image.data();
  auto brightness = [&](std::size_t i) { return px[3 * i] + px[3 * i + 1] + px[3 * i + 2]; };
  std::size_t best = candidates[0];
  for (std::size_t k = 1; k < keep; ++k) {
    const std::size_t i = candidates[k];
    const double bi = brightness(i);
    const double bb = brightness(best);
    if (bi > bb || (bi == bb && i < best)) best = i;
  }

  result.r = px[3 * best];
  result.g = px[3 * best + 1];
  result.b = px[3 * best + 2];
  result.row = best / image.width();
  result.col = best % image.width();
  return result;
}

AtmosphericLight clip_airlight(double r, double g, double b, const AirlightConfig& cfg) {
  cfg.validate();
  const double lum = std::clamp(bt709_luminance(r, g, b), cfg.lum_low, cfg.lum_high);
  return AtmosphericLight::neutral(lum);
}

AirlightEstimate estimate_airlight(const RgbImage& image, const DepthMap& depth,
                                   const AirlightConfig& cfg) {
  AirlightEstimate est;
  est.raw = estimate_airlight_raw(image, &depth, cfg);
  est.light = clip_airlight(est.raw.r, est.raw.g, est.raw.b, cfg);
  return est;
}

CorpusStats corpus_airlight_stats(std::span<const CorpusEntry> corpus, const AirlightConfig& cfg,
                                  unsigned workers) {
  if (corpus.empty()) throw InputError("airlight statistics need a non-empty corpus");
  cfg.validate();

  CorpusStats stats;
  stats.estimates.resize(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    const auto& entry = corpus[i];
    stats.estimates[i] =
        estimate_airlight_raw(entry.image, entry.depth ? &*entry.depth : nullptr, cfg);
  });

  for (const auto& e : stats.estimates) {
    stats.mean_r += e.r;
    stats.mean_g += e.g;
    stats.mean_b += e.b;
  }
  const double count = static_cast<double>(stats.estimates.size());
  stats.mean_r /= count;
  stats.mean_g /= count;
  stats.mean_b /= count;
  stats.mean_luminance = 0.2126 * stats.mean_r + 0.7152 * stats.mean_g + 0.0722 * stats.mean_b;
  stats.channel_spread = std::max({std::abs(stats.mean_r - stats.mean_g),
                                   std::abs(stats.mean_r - stats.mean_b),
                                   std::abs(stats.mean_g - stats.mean_b)});
  return stats;
}

}  // namespace fogsim
