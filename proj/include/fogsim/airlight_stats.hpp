#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>

namespace fogsim {

/// Table-style summary of per-image atmospheric light estimates.
struct CorpusReport {
  std::size_t n_images = 0;
  double mean_r = 0.0;
  double mean_g = 0.0;
  double mean_b = 0.0;
  double mean_luminance = 0.0;  // BT.709 luminance of the mean vector
  double channel_spread = 0.0;  // max pairwise |mean_ci - mean_cj|
  // Lowest and highest per-image luminance; informational only.
  std::pair<double, double> derived_clip_bounds{0.0, 0.0};
};

CorpusReport build_report(std::span<const std::array<double, 3>> estimates);

// Human-readable table.
std::string format_report_text(const CorpusReport& report);

// Flat JSON object with stable keys and fixed 6-decimal numbers.
std::string format_report_json(const CorpusReport& report);

}  // namespace fogsim
