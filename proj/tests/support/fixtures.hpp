#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "fogsim/core.hpp"
#include "fogsim/io.hpp"

namespace fogsim::fixture {

// Street-like scene: far sky in the top third, a ramp of nearer structure
// below it. Deterministic in `variant`.
inline std::pair<RgbImage, DepthMap> synthetic_scene(std::size_t w, std::size_t h, int variant) {
  RgbImage img(w, h);
  DepthMap depth(w, h);
  std::mt19937_64 rng(static_cast<std::uint64_t>(variant) * 7919 + 1);
  std::uniform_real_distribution<double> jitter(0.0, 0.1);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (r < h / 3) {
        img.at(r, c, 0) = 0.45 + 0.01 * (variant % 5);
        img.at(r, c, 1) = 0.6;
        img.at(r, c, 2) = 0.9;
        depth.at(r, c) = 5000.0;
      } else {
        const double base = 0.15 + 0.5 * static_cast<double>(c) / w;
        for (std::size_t ch = 0; ch < 3; ++ch) img.at(r, c, ch) = base * (0.8 + 0.1 * ch) + jitter(rng);
        depth.at(r, c) = 3.0 + 60.0 * static_cast<double>(h - r) / h;
      }
    }
  }
  return {img, depth};
}

inline PointCloud synthetic_cloud(std::size_t n, std::uint64_t seed, double max_range = 120.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> range(2.0, max_range);
  std::uniform_real_distribution<double> azimuth(-3.14159, 3.14159);
  std::uniform_real_distribution<double> elevation(-0.3, 0.05);
  std::uniform_real_distribution<double> intensity(0.05, 1.0);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = range(rng);
    const double az = azimuth(rng);
    const double el = elevation(rng);
    cloud.points.push_back({r * std::cos(el) * std::cos(az), r * std::cos(el) * std::sin(az),
                            r * std::sin(el), intensity(rng)});
  }
  return cloud;
}

// Writes <root>/<scene>/{images,depth,lidar,labels}/<frame>.* for a toy
// dataset. Odd frames use float32 depth with sky, even frames 16-bit PNG.
inline void write_toy_frame(const std::filesystem::path& root, const std::string& scene,
                            const std::string& frame, int variant, bool with_lidar = true,
                            bool with_labels = true) {
  namespace fs = std::filesystem;
  const fs::path base = root / scene;
  for (const char* sub : {"images", "depth", "lidar", "labels"}) fs::create_directories(base / sub);
  auto [img, depth] = synthetic_scene(40, 30, variant);
  io::write_png_rgb(base / "images" / (frame + ".png"), img);
  if (variant % 2) {
    io::write_depth_f32(base / "depth" / (frame + ".f32"), depth);
  } else {
    for (auto& d : depth.data()) d = std::min(d, 65.0);
    io::write_depth_png_mm(base / "depth" / (frame + ".png"), depth);
  }
  if (with_lidar) {
    PointCloud cloud = synthetic_cloud(500, static_cast<std::uint64_t>(variant));
    for (auto& p : cloud.points) {  // float32 storage
      p = {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z),
           static_cast<float>(p.intensity)};
    }
    io::write_kitti_bin(base / "lidar" / (frame + ".bin"), cloud);
  }
  if (with_labels) {
    io::write_file(base / "labels" / (frame + ".txt"),
                   "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12\r\nPedestrian " +
                       std::to_string(variant) + " \x01\xff\n");
  }
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fogsim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fogsim::fixture
