#include <gtest/gtest.h>
#include <png.h>

#include <cmath>
#include <random>

#include "fogsim/io.hpp"
#include "support/fixtures.hpp"

using namespace fogsim;
namespace fs = std::filesystem;

TEST(Quantize, RoundHalfToEven) {
  EXPECT_EQ(io::quantize8(0.0), 0);
  EXPECT_EQ(io::quantize8(1.0), 255);
  EXPECT_EQ(io::quantize8(0.5 / 255.0), 0);   // 0.5 -> 0
  EXPECT_EQ(io::quantize8(1.5 / 255.0), 2);   // 1.5 -> 2
  EXPECT_EQ(io::quantize8(2.5 / 255.0), 2);   // 2.5 -> 2
  EXPECT_EQ(io::quantize8(-0.2), 0);
  EXPECT_EQ(io::quantize8(1.7), 255);
}

TEST(PngIo, EightBitRoundTrip) {
  const fs::path dir = fixture::scratch_dir("png8");
  RgbImage img(7, 5);
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> u(0, 255);
  for (auto& v : img.data()) v = u(rng) / 255.0;
  io::write_png_rgb(dir / "a.png", img);
  const RgbImage back = io::read_png_rgb(dir / "a.png");
  ASSERT_EQ(back.width(), 7u);
  ASSERT_EQ(back.height(), 5u);
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_EQ(back.data()[i], img.data()[i]);
  // Same pixels, same bytes.
  io::write_png_rgb(dir / "b.png", img);
  EXPECT_EQ(io::read_file(dir / "a.png"), io::read_file(dir / "b.png"));
}

TEST(PngIo, MissingFileThrows) {
  EXPECT_THROW(io::read_png_rgb("/nonexistent/x.png"), io::IoError);
}

TEST(DepthIo, MillimetrePngRoundTrip) {
  const fs::path dir = fixture::scratch_dir("depth16");
  DepthMap depth(6, 4);
  for (std::size_t i = 0; i < depth.data().size(); ++i) depth.data()[i] = 0.001 * (1 + 997 * i);
  io::write_depth_png_mm(dir / "d.png", depth);
  const DepthMap back = io::read_depth(dir / "d.png");
  for (std::size_t i = 0; i < depth.data().size(); ++i) {
    EXPECT_NEAR(back.data()[i], depth.data()[i], 1e-12);
  }
}

namespace {

// Minimal 16-bit grayscale writer that allows zero pixels.
void write_gray16_raw(const fs::path& path, std::size_t w, std::size_t h,
                      const std::vector<std::uint16_t>& px) {
  FILE* f = std::fopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(w * 2);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      row[2 * c] = static_cast<std::uint8_t>(px[r * w + c] >> 8);
      row[2 * c + 1] = static_cast<std::uint8_t>(px[r * w + c] & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace

TEST(DepthIo, ZeroMillimetresIsInvalid) {
  const fs::path dir = fixture::scratch_dir("depth_zero");
  std::vector<std::uint16_t> px(12, 4500);
  px[1 * 4 + 2] = 0;
  write_gray16_raw(dir / "d.png", 4, 3, px);
  try {
    io::read_depth(dir / "d.png");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1, col 2"), std::string::npos) << e.what();
  }
  px[1 * 4 + 2] = 65535;
  write_gray16_raw(dir / "d.png", 4, 3, px);
  const DepthMap d = io::read_depth(dir / "d.png");
  EXPECT_EQ(d.at(0, 0), 4.5);
  EXPECT_EQ(d.at(1, 2), 65.535);
  DepthMap tiny(2, 2, 0.0004);
  EXPECT_THROW(io::write_depth_png_mm(dir / "bad.png", tiny), DataError);
}

TEST(DepthIo, Float32WithHeader) {
  const fs::path dir = fixture::scratch_dir("depthf32");
  DepthMap depth(5, 3);
  for (std::size_t i = 0; i < depth.data().size(); ++i) depth.data()[i] = 0.5 + 2000.0 * i;
  io::write_depth_f32(dir / "d.f32", depth);
  EXPECT_EQ(io::read_file(dir / "d.hdr"), "5 3\n");
  const DepthMap back = io::read_depth(dir / "d.f32");
  EXPECT_EQ(back.width(), 5u);
  for (std::size_t i = 0; i < depth.data().size(); ++i) {
    EXPECT_EQ(back.data()[i], static_cast<float>(depth.data()[i]));
  }
  io::write_file(dir / "d.hdr", "6 3\n");
  EXPECT_THROW(io::read_depth(dir / "d.f32"), DataError);
}

TEST(KittiBin, RoundTripAndTruncation) {
  const fs::path dir = fixture::scratch_dir("kitti");
  PointCloud cloud{{{1.5, -2.25, 0.5, 0.75}, {10.0, 0.0, -1.0, 0.0}}};
  io::write_kitti_bin(dir / "c.bin", cloud);
  EXPECT_EQ(fs::file_size(dir / "c.bin"), 32u);
  EXPECT_EQ(io::read_kitti_bin(dir / "c.bin"), cloud);
  io::write_file(dir / "bad.bin", std::string(18, '\0'));
  EXPECT_THROW(io::read_kitti_bin(dir / "bad.bin"), DataError);
}
