#include "fogsim/io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace fogsim::io {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

struct PngRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;  // row-major, `channels` per pixel
};

// Reads a PNG expanding palettes and low bit depths; keeps gray vs colour.
PngRaster read_png_raw(const fs::path& path, bool want_rgb) {
  FilePtr file = open_file(path, "rb");
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  PngRaster raster;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to read PNG " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  png_set_expand(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (want_rgb && !(color_type & PNG_COLOR_MASK_COLOR)) png_set_gray_to_rgb(png);
  if (png_get_bit_depth(png, info) == 16 && std::endian::native == std::endian::little) {
    png_set_swap(png);
  }
  png_read_update_info(png, info);

  raster.width = png_get_image_width(png, info);
  raster.height = png_get_image_height(png, info);
  raster.channels = png_get_channels(png, info);
  raster.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * raster.height);
  rows.resize(raster.height);
  for (std::size_t r = 0; r < raster.height; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = raster.width * raster.height * raster.channels;
  raster.samples.resize(count);
  if (raster.bit_depth == 16) {
    std::memcpy(raster.samples.data(), buffer.data(), count * 2);
  } else {
    for (std::size_t r = 0; r < raster.height; ++r) {
      const std::size_t per_row = raster.width * raster.channels;
      for (std::size_t i = 0; i < per_row; ++i) {
        raster.samples[r * per_row + i] = rows[r][i];
      }
    }
  }
  return raster;
}

void write_png_raw(const fs::path& path, std::size_t width, std::size_t height, int color_type,
                   int bit_depth, std::span<const std::uint8_t> bytes) {
  FilePtr file = open_file(path, "wb");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = width * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (std::size_t r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(bytes.data() + r * rowbytes);
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to write PNG " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("failed to flush " + path.string());
}

}  // namespace

std::uint8_t quantize8(double v) {
  const double scaled = std::nearbyint(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<std::uint8_t>(scaled);
}

RgbImage read_png_rgb(const fs::path& path) {
  const PngRaster raster = read_png_raw(path, true);
  const double scale = raster.bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<double> data(raster.samples.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = raster.samples[i] / scale;
  return RgbImage(raster.width, raster.height, std::move(data));
}

void write_png_rgb(const fs::path& path, const RgbImage& image) {
  const auto src = image.data();
  std::vector<std::uint8_t> bytes(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) bytes[i] = quantize8(src[i]);
  write_png_raw(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, bytes);
}

DepthMap read_depth_png_mm(const fs::path& path) {
  const PngRaster raster = read_png_raw(path, false);
  if (raster.channels != 1 || raster.bit_depth != 16) {
    throw DataError("depth PNG must be 16-bit grayscale: " + path.string());
  }
  std::vector<double> data(raster.samples.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (raster.samples[i] == 0) {
      throw DataError("invalid (zero) depth at row " + std::to_string(i / raster.width) +
                      ", col " + std::to_string(i % raster.width) + " in " + path.string());
    }
    data[i] = raster.samples[i] / 1000.0;
  }
  return DepthMap(raster.width, raster.height, std::move(data));
}

void write_depth_png_mm(const fs::path& path, const DepthMap& depth) {
  const auto src = depth.data();
  std::vector<std::uint16_t> mm(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::nearbyint(src[i] * 1000.0);
    if (!(v >= 1.0 && v <= 65535.0)) {
      throw DataError("depth not representable in 16-bit millimetres: " + std::to_string(src[i]));
    }
    mm[i] = static_cast<std::uint16_t>(v);
  }
  std::vector<std::uint8_t> bytes(mm.size() * 2);
  std::memcpy(bytes.data(), mm.data(), bytes.size());
  write_png_raw(path, depth.width(), depth.height(), PNG_COLOR_TYPE_GRAY, 16, bytes);
}

fs::path f32_header_path(const fs::path& path) {
  fs::path hdr = path;
  hdr.replace_extension(".hdr");
  return hdr;
}

DepthMap read_depth_f32(const fs::path& path) {
  std::istringstream header(read_file(f32_header_path(path)));
  std::size_t width = 0;
  std::size_t height = 0;
  if (!(header >> width >> height) || width == 0 || height == 0) {
    throw DataError("malformed depth header for " + path.string());
  }
  const std::string raw = read_file(path);
  if (raw.size() != width * height * 4) {
    throw DataError("depth file " + path.string() + " has " + std::to_string(raw.size()) +
                    " bytes, header says " + std::to_string(width) + "x" + std::to_string(height));
  }
  static_assert(std::endian::native == std::endian::little, "raw float I/O assumes little endian");
  std::vector<float> values(width * height);
  std::memcpy(values.data(), raw.data(), raw.size());
  return DepthMap(width, height, std::vector<double>(values.begin(), values.end()));
}

void write_depth_f32(const fs::path& path, const DepthMap& depth) {
  const auto src = depth.data();
  std::vector<float> values(src.begin(), src.end());
  std::string raw(values.size() * 4, '\0');
  std::memcpy(raw.data(), values.data(), raw.size());
  write_file(path, raw);
  write_file(f32_header_path(path),
             std::to_string(depth.width()) + " " + std::to_string(depth.height()) + "\n");
}

DepthMap read_depth(const fs::path& path) {
  if (path.extension() == ".f32") return read_depth_f32(path);
  return read_depth_png_mm(path);
}

PointCloud read_kitti_bin(const fs::path& path) {
  const std::string raw = read_file(path);
  if (raw.size() % 16 != 0) {
    throw DataError("point cloud " + path.string() + " is not a multiple of 16 bytes");
  }
  std::vector<float> values(raw.size() / 4);
  std::memcpy(values.data(), raw.data(), raw.size());
  PointCloud cloud;
  cloud.points.resize(values.size() / 4);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    cloud.points[i] = {values[4 * i], values[4 * i + 1], values[4 * i + 2], values[4 * i + 3]};
  }
  return cloud;
}

void write_kitti_bin(const fs::path& path, const PointCloud& cloud) {
  std::vector<float> values;
  values.reserve(cloud.size() * 4);
  for (const auto& p : cloud.points) {
    values.insert(values.end(), {static_cast<float>(p.x), static_cast<float>(p.y),
                                 static_cast<float>(p.z), static_cast<float>(p.intensity)});
  }
  std::string raw(values.size() * 4, '\0');
  if (!raw.empty()) std::memcpy(raw.data(), values.data(), raw.size());
  write_file(path, raw);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fogsim::io
