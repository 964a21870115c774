#include <gtest/gtest.h>

#include <random>

#include "fogsim/airlight.hpp"
#include "fogsim/optics.hpp"
#include "support/oracles.hpp"

using namespace fogsim;

namespace {

std::vector<double> flat(const RgbImage& img) { return {img.data().begin(), img.data().end()}; }
std::vector<double> flat(const DepthMap& d) { return {d.data().begin(), d.data().end()}; }

void fill_rect(RgbImage& img, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1,
               std::array<double, 3> rgb) {
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = c0; c < c1; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) img.at(r, c, ch) = rgb[ch];
    }
  }
}

void fill_rect(DepthMap& d, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1,
               double v) {
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = c0; c < c1; ++c) d.at(r, c) = v;
  }
}

}  // namespace

TEST(Luminance, Bt709Weights) {
  EXPECT_DOUBLE_EQ(bt709_luminance(1, 1, 1), 1.0);
  EXPECT_NEAR(bt709_luminance(0.6370, 0.6374, 0.6384), 0.6374, 5e-5);
  EXPECT_NEAR(bt709_luminance(0.8537, 0.8531, 0.8848), 0.8555, 5e-5);
  EXPECT_THROW(bt709_luminance(1.1, 0.5, 0.5), InvalidParameterError);
  EXPECT_THROW(bt709_luminance(0.5, -0.1, 0.5), InvalidParameterError);
}

TEST(Luminance, GreyPixelKeepsItsValue) {
  for (double v = 0.0; v <= 1.0; v += 0.01) EXPECT_NEAR(bt709_luminance(v, v, v), v, 1e-15);
}

TEST(AirlightConfig, Validation) {
  AirlightConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dark_channel_patch = 4;
  EXPECT_THROW(cfg.validate(), InvalidParameterError);
  cfg = {};
  cfg.candidate_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidParameterError);
  cfg = {};
  cfg.lum_low = 0.9;
  EXPECT_THROW(cfg.validate(), InvalidParameterError);
}

TEST(DarkChannel, MinFilterMatchesBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  RgbImage img(23, 17);
  for (auto& v : img.data()) v = u(rng);
  for (int patch : {1, 3, 7, 15}) {
    const auto dark = dark_channel(img, patch);
    const long rad = patch / 2;
    for (long r = 0; r < 17; ++r) {
      for (long c = 0; c < 23; ++c) {
        double m = 1.0;
        for (long y = std::max(0L, r - rad); y <= std::min(16L, r + rad); ++y) {
          for (long x = std::max(0L, c - rad); x <= std::min(22L, c + rad); ++x) {
            for (std::size_t ch = 0; ch < 3; ++ch) m = std::min(m, img.at(y, x, ch));
          }
        }
        ASSERT_EQ(dark[r * 23 + c], m);
      }
    }
  }
}

TEST(AirlightRaw, UniformSkyIsSelected) {
  RgbImage img(40, 30, 0.2);
  DepthMap depth(40, 30, 60.0);
  fill_rect(img, 0, 10, 0, 40, {0.9, 0.9, 0.9});
  fill_rect(depth, 0, 10, 0, 40, 5000.0);
  // A brighter but nearby object must not win.
  fill_rect(img, 20, 30, 0, 20, {0.95, 0.97, 0.99});
  const RawAirlight raw = estimate_airlight_raw(img, depth);
  EXPECT_EQ(raw.channels(), (std::array<double, 3>{0.9, 0.9, 0.9}));
  EXPECT_FALSE(raw.fallback);
  EXPECT_LT(raw.row, 10u);
}

TEST(AirlightRaw, NoFarPixelsFallsBackToUnfilteredPrior) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0, 1);
  RgbImage img(25, 25);
  for (auto& v : img.data()) v = u(rng);
  DepthMap depth(25, 25, 999.0);
  const RawAirlight filtered = estimate_airlight_raw(img, depth);
  const RawAirlight unfiltered = estimate_airlight_raw(img, nullptr);
  EXPECT_TRUE(filtered.fallback);
  EXPECT_FALSE(unfiltered.fallback);
  EXPECT_EQ(filtered.channels(), unfiltered.channels());
  const auto ref = oracle::airlight(flat(img), nullptr, 25, 25, 1000, 15, 0.001);
  EXPECT_EQ(filtered.channels(), ref.rgb);
}

TEST(AirlightRaw, BrighterOfTwoSkyPatchesWins) {
  RgbImage img(32, 32, 0.3);
  DepthMap depth(32, 32, 50.0);
  fill_rect(img, 0, 16, 0, 16, {0.70, 0.70, 0.72});
  fill_rect(img, 0, 16, 16, 32, {0.85, 0.86, 0.88});
  fill_rect(depth, 0, 16, 0, 32, 4000.0);
  const RawAirlight raw = estimate_airlight_raw(img, depth);
  const auto dref = flat(depth);
  const auto expected = oracle::airlight(flat(img), &dref, 32, 32, 1000, 15, 0.001);
  EXPECT_EQ(raw.channels(), expected.rgb);
  EXPECT_EQ(raw.row * 32 + raw.col, expected.index);
  EXPECT_EQ(raw.channels(), (std::array<double, 3>{0.85, 0.86, 0.88}));
}

TEST(AirlightRaw, MatchesEnumerationOnRandomScenes) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> dim(5, 48);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t w = dim(rng), h = dim(rng);
    RgbImage img(w, h);
    // Quantized values force ties in both the dark channel and brightness.
    for (auto& v : img.data()) v = std::round(u(rng) * 8) / 8;
    DepthMap depth(w, h);
    for (auto& d : depth.data()) d = u(rng) < 0.3 ? 3000.0 : 100.0;
    AirlightConfig cfg;
    cfg.dark_channel_patch = 1 + 2 * (trial % 5);
    cfg.candidate_fraction = trial % 3 == 0 ? 0.001 : (trial % 3 == 1 ? 0.05 : 1.0);
    const auto raw = estimate_airlight_raw(img, depth, cfg);
    const auto d = flat(depth);
    const auto ref = oracle::airlight(flat(img), &d, w, h, cfg.depth_threshold,
                                      cfg.dark_channel_patch, cfg.candidate_fraction);
    ASSERT_EQ(raw.row * w + raw.col, ref.index) << "trial " << trial;
    ASSERT_EQ(raw.fallback, ref.fallback);
  }
}

TEST(AirlightRaw, DepthFilterChangesPickOnlyWhenUnfilteredPickIsNear) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0, 1);
  int changed = 0;
  for (int trial = 0; trial < 40; ++trial) {
    RgbImage img(36, 24);
    for (auto& v : img.data()) v = 0.1 + 0.5 * u(rng);
    DepthMap depth(36, 24, 80.0);
    fill_rect(depth, 0, 8, 0, 36, 3000.0);
    fill_rect(img, 0, 8, 0, 36, {0.6 + 0.2 * u(rng), 0.7, 0.75});
    // Half the trials hide a brilliant foreground object.
    if (trial % 2) fill_rect(img, 14, 24, 10, 30, {0.95, 0.95, 0.95});
    const auto filtered = estimate_airlight_raw(img, depth);
    const auto unfiltered = estimate_airlight_raw(img, nullptr);
    const bool outside = depth.at(unfiltered.row, unfiltered.col) <= 1000.0;
    const bool differs = filtered.row != unfiltered.row || filtered.col != unfiltered.col;
    EXPECT_EQ(differs, outside) << "trial " << trial;
    changed += differs;
  }
  EXPECT_GT(changed, 0);
}

TEST(EstimateAirlight, ClipExamples) {
  AtmosphericLight a = clip_airlight(0.2, 0.3, 0.9);
  EXPECT_NEAR(bt709_luminance(0.2, 0.3, 0.9), 0.32206, 1e-12);
  EXPECT_EQ(a, AtmosphericLight::neutral(0.6374));
  EXPECT_EQ(clip_airlight(1, 1, 1), AtmosphericLight::neutral(0.8555));
  a = clip_airlight(0.7, 0.7, 0.7);
  EXPECT_NEAR(a.r, 0.7, 1e-15);
  EXPECT_EQ(a.r, a.g);
  EXPECT_EQ(a.g, a.b);
}

TEST(EstimateAirlight, NeutralAndInRangeForRandomInputs) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 5000; ++i) {
    const double r = u(rng), g = u(rng), b = u(rng);
    const AtmosphericLight a = clip_airlight(r, g, b);
    ASSERT_EQ(a.r, a.g);
    ASSERT_EQ(a.g, a.b);
    ASSERT_GE(a.r, 0.6374);
    ASSERT_LE(a.r, 0.8555);
    const double l1 = bt709_luminance(r, g, b);
    const double r2 = u(rng), g2 = u(rng), b2 = u(rng);
    const double l2 = bt709_luminance(r2, g2, b2);
    const AtmosphericLight a2 = clip_airlight(r2, g2, b2);
    if (l1 <= l2) ASSERT_LE(a.r, a2.r);
  }
}

TEST(EstimateAirlight, BlueSkyBecomesNeutral) {
  RgbImage img(30, 30, 0.15);
  DepthMap depth(30, 30, 30.0);
  fill_rect(img, 0, 12, 0, 30, {0.35, 0.55, 0.95});
  fill_rect(depth, 0, 12, 0, 30, 8000.0);
  const AirlightEstimate est = estimate_airlight(img, depth);
  EXPECT_EQ(est.raw.channels(), (std::array<double, 3>{0.35, 0.55, 0.95}));
  EXPECT_EQ(est.light, AtmosphericLight::neutral(0.6374));
}

TEST(CorpusStats, EmptyCorpusIsAnError) {
  EXPECT_THROW(corpus_airlight_stats(std::span<const CorpusEntry>{}), InputError);
}

TEST(CorpusStats, SingleImageEqualsItsEstimate) {
  RgbImage img(20, 20, 0.2);
  fill_rect(img, 0, 8, 0, 20, {0.6, 0.65, 0.7});
  DepthMap depth(20, 20, 10.0);
  fill_rect(depth, 0, 8, 0, 20, 2000.0);
  const std::vector<CorpusEntry> corpus{{img, depth}};
  const CorpusStats s = corpus_airlight_stats(corpus);
  const RawAirlight raw = estimate_airlight_raw(img, depth);
  EXPECT_EQ(s.mean_r, raw.r);
  EXPECT_EQ(s.mean_g, raw.g);
  EXPECT_EQ(s.mean_b, raw.b);
  EXPECT_NEAR(s.channel_spread, 0.1, 1e-12);
}

TEST(CorpusStats, RecoversAirlightOfSynthesizedFog) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<CorpusEntry> corpus;
  for (int i = 0; i < 12; ++i) {
    RgbImage img(48, 32);
    for (auto& v : img.data()) v = u(rng);
    DepthMap depth(48, 32);
    for (std::size_t r = 0; r < 32; ++r) {
      for (std::size_t c = 0; c < 48; ++c) depth.at(r, c) = r < 10 ? 6000.0 : 5.0 + 5.0 * r;
    }
    auto fog = simulate_camera_fog(img, depth, 120.0, AtmosphericLight::neutral(0.7));
    corpus.push_back({std::move(fog.image), std::nullopt});
  }
  const CorpusStats s = corpus_airlight_stats(corpus, {}, 3);
  EXPECT_NEAR(s.mean_r, 0.7, 0.05);
  EXPECT_NEAR(s.mean_g, 0.7, 0.05);
  EXPECT_NEAR(s.mean_b, 0.7, 0.05);
  EXPECT_LT(s.channel_spread, 0.02);
  EXPECT_EQ(corpus_airlight_stats(corpus, {}, 1).estimates.size(), corpus.size());
}
