#include "fogsim/airlight_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fogsim/core.hpp"

namespace fogsim {

CorpusReport build_report(std::span<const std::array<double, 3>> estimates) {
  if (estimates.empty()) throw InputError("cannot build a report from zero estimates");

  CorpusReport report;
  report.n_images = estimates.size();
  double lum_min = std::numeric_limits<double>::infinity();
  double lum_max = -lum_min;
  for (const auto& e : estimates) {
    report.mean_r += e[0];
    report.mean_g += e[1];
    report.mean_b += e[2];
    const double lum = AtmosphericLight{e[0], e[1], e[2]}.luminance();
    lum_min = std::min(lum_min, lum);
    lum_max = std::max(lum_max, lum);
  }
  const auto n = static_cast<double>(estimates.size());
  report.mean_r /= n;
  report.mean_g /= n;
  report.mean_b /= n;
  report.mean_luminance = AtmosphericLight{report.mean_r, report.mean_g, report.mean_b}.luminance();
  report.channel_spread = std::max({std::abs(report.mean_r - report.mean_g),
                                    std::abs(report.mean_r - report.mean_b),
                                    std::abs(report.mean_g - report.mean_b)});
  report.derived_clip_bounds = {lum_min, lum_max};
  return report;
}

std::string format_report_text(const CorpusReport& r) {
  std::string out;
  out += fmt::format("images            {}\n", r.n_images);
  out += fmt::format("{:<10}{:>12}{:>12}{:>12}\n", "", "Average R", "Average G", "Average B");
  out += fmt::format("{:<10}{:>12.4f}{:>12.4f}{:>12.4f}\n", "corpus", r.mean_r, r.mean_g, r.mean_b);
  out += fmt::format("mean luminance    {:.4f}\n", r.mean_luminance);
  out += fmt::format("channel spread    {:.4f} ({})\n", r.channel_spread,
                     r.channel_spread < 0.02 ? "spectrally neutral" : "colour cast");
  out += fmt::format("luminance range   [{:.4f}, {:.4f}]\n", r.derived_clip_bounds.first,
                     r.derived_clip_bounds.second);
  return out;
}

std::string format_report_json(const CorpusReport& r) {
  return fmt::format(
      "{{\n"
      "  \"n_images\": {},\n"
      "  \"mean_r\": {:.6f},\n"
      "  \"mean_g\": {:.6f},\n"
      "  \"mean_b\": {:.6f},\n"
      "  \"mean_luminance\": {:.6f},\n"
      "  \"channel_spread\": {:.6f},\n"
      "  \"derived_clip_bounds\": [{:.6f}, {:.6f}]\n"
      "}}\n",
      r.n_images, r.mean_r, r.mean_g, r.mean_b, r.mean_luminance, r.channel_spread,
      r.derived_clip_bounds.first, r.derived_clip_bounds.second);
}

}  // namespace fogsim
