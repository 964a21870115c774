#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fogsim/core.hpp"

namespace fogsim::io {

class IoError : public FogError {
 public:
  using FogError::FogError;
};

/// Reads an 8- or 16-bit PNG (gray, RGB, palette; alpha dropped) into
/// normalized channels.
RgbImage read_png_rgb(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. Channels are quantized as round-half-to-even
/// of v * 255.
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

std::uint8_t quantize8(double v);

/// 16-bit grayscale PNG holding millimetres. A zero pixel is invalid and
/// raises DataError with its coordinates.
DepthMap read_depth_png_mm(const std::filesystem::path& path);
void write_depth_png_mm(const std::filesystem::path& path, const DepthMap& depth);

/// Raw little-endian float32 metres with a sidecar `<stem>.hdr` holding "W H".
DepthMap read_depth_f32(const std::filesystem::path& path);
void write_depth_f32(const std::filesystem::path& path, const DepthMap& depth);
std::filesystem::path f32_header_path(const std::filesystem::path& path);

/// Dispatches on the extension (.png or .f32).
DepthMap read_depth(const std::filesystem::path& path);

/// KITTI-style little-endian float32 quadruples x, y, z, intensity.
PointCloud read_kitti_bin(const std::filesystem::path& path);
void write_kitti_bin(const std::filesystem::path& path, const PointCloud& cloud);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace fogsim::io
