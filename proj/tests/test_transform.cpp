#include <gtest/gtest.h>

#include <random>

#include "oft/synth.hpp"
#include "oft/transform.hpp"

namespace oft {
namespace {

MeasureStack constant_stack(Dims d, std::array<float, 6> w) {
  return {Volume(d, w[0]), Volume(d, w[1]), Volume(d, w[2]), Volume(d, w[3]), Volume(d, w[4]), Volume(d, w[5])};
}

TEST(CombineMode, ParseAndMembers) {
  EXPECT_EQ(parse_combine_mode("all"), CombineMode::All);
  EXPECT_EQ(parse_combine_mode("no-mean-align"), CombineMode::NoMeanAlign);
  EXPECT_EQ(parse_combine_mode("line-pair"), CombineMode::LinePair);
  EXPECT_THROW(parse_combine_mode("sum"), InvalidArgument);
  EXPECT_EQ(participating_measures(CombineMode::NoMeanAlign), (std::vector<int>{1, 2, 3, 5, 6}));
  EXPECT_EQ(to_string(CombineMode::LinePair), "line-pair");
}

TEST(Combine, Products) {
  const Dims d{2, 2, 2};
  const auto s = constant_stack(d, {2, 3, 5, 7, 11, 13});
  EXPECT_EQ(combine(s, CombineMode::All)[0], 2.0f * 3 * 5 * 7 * 11 * 13);
  EXPECT_EQ(combine(s, CombineMode::NoMeanAlign)[0], 2.0f * 3 * 5 * 11 * 13);
  EXPECT_EQ(combine(s, CombineMode::LinePair)[0], 10.0f);
}

TEST(Combine, ZeroAndNegativeFactorsAnnihilate) {
  const Dims d{2, 1, 1};
  EXPECT_EQ(combine(constant_stack(d, {2, 3, 5, 0, 11, 13}), CombineMode::All)[0], 0.0f);
  // two negative factors must not produce a positive response
  EXPECT_EQ(combine(constant_stack(d, {2, -3, 5, -7, 11, 13}), CombineMode::All)[0], 0.0f);
  EXPECT_EQ(combine(constant_stack(d, {2, 3, 5, -7, 11, 13}), CombineMode::NoMeanAlign)[0], 2.0f * 3 * 5 * 11 * 13);
}

TEST(Combine, NormalizeAndSaturation) {
  MeasureStack s = constant_stack({3, 1, 1}, {1, 1, 1, 1, 1, 1});
  s.w1[0] = 0;
  s.w1[1] = 2;
  s.w1[2] = 4;
  const Volume out = combine(s, CombineMode::LinePair, true);
  EXPECT_EQ(out[0], 0.0f);
  EXPECT_EQ(out[1], 0.5f);
  EXPECT_EQ(out[2], 1.0f);
  const Volume flat = combine(constant_stack({3, 1, 1}, {2, 2, 2, 2, 2, 2}), CombineMode::All, true);
  for (float x : flat.values()) EXPECT_EQ(x, 0.0f);
  const Volume big = combine(constant_stack({1, 1, 1}, {1e10f, 1e10f, 1e10f, 1e10f, 1e10f, 1e10f}), CombineMode::All);
  EXPECT_TRUE(std::isfinite(big[0]));
  EXPECT_EQ(big[0], std::numeric_limits<float>::max());
}

TEST(Combine, RejectsMismatchedStack) {
  MeasureStack s = constant_stack({2, 2, 2}, {1, 1, 1, 1, 1, 1});
  s.w6 = Volume({2, 2, 3});
  EXPECT_THROW(combine(s, CombineMode::All), DimensionMismatch);
}

TEST(Pipeline, ZeroVolume) {
  PipelineConfig cfg;
  cfg.epsilon = 3;
  cfg.k_directions = 12;
  for (auto mode : {CombineMode::All, CombineMode::NoMeanAlign, CombineMode::LinePair}) {
    cfg.mode = mode;
    const auto r = run_pipeline(Volume({8, 8, 8}), cfg);
    for (float x : r.enhanced.values()) EXPECT_EQ(x, 0.0f);
  }
}

TEST(Pipeline, ConstantVolumeLinePair) {
  PipelineConfig cfg;
  cfg.epsilon = 5;
  cfg.k_directions = 16;
  cfg.mode = CombineMode::LinePair;
  const auto r = run_pipeline(Volume({14, 14, 14}, 1.5f), cfg);
  EXPECT_EQ(r.enhanced(7, 7, 7), 56.25f);
  EXPECT_EQ(r.timings.size(), 3u);
}

TEST(Pipeline, OutputNonNegative) {
  std::mt19937 rng(2);
  std::normal_distribution<float> n;
  Volume v({12, 12, 12});
  for (float& x : v.values()) x = n(rng);
  PipelineConfig cfg;
  cfg.epsilon = 4;
  cfg.k_directions = 16;
  for (auto mode : {CombineMode::All, CombineMode::NoMeanAlign, CombineMode::LinePair}) {
    cfg.mode = mode;
    const Volume out = run_pipeline(v, cfg).enhanced;
    for (float x : out.values()) EXPECT_GE(x, 0.0f);
  }
}

TEST(Pipeline, DeterministicAcrossThreadCounts) {
  SynthParams p;
  p.dims = {20, 20, 20};
  p.curve_thickness = 3;
  const Volume v = make_curve_volume(p).image;
  PipelineConfig cfg;
  cfg.epsilon = 4.5;
  cfg.k_directions = 24;
  set_thread_count(1);
  const auto a = run_pipeline(v, cfg);
  set_thread_count(8);
  const auto b = run_pipeline(v, cfg);
  set_thread_count(0);
  EXPECT_EQ(a.enhanced, b.enhanced);
  for (int i = 1; i <= 6; ++i) EXPECT_EQ(a.stack[i], b.stack[i]);
}

TEST(Pipeline, PlanarThreeDPathEqualsTwoDPath) {
  SynthParams p;
  p.dims = {40, 40, 1};
  p.curve_thickness = 3;
  p.seed = 3;
  const Volume img = make_curve_image_2d(p).image;
  const auto dirs2 = directions_2d(24);
  PipelineConfig cfg;
  cfg.epsilon = 4.5;
  cfg.mode = CombineMode::All;
  const auto planar = run_pipeline(img, dirs2, cfg);

  // same image as the middle slice of a 3-slice volume, same in-plane directions declared as a 3D set
  Volume stack({40, 40, 3});
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 40; ++i) stack(i, j, 1) = img(i, j, 0);
  const auto dirs3 = DirectionSet::from_vectors(3, dirs2.vectors());
  const auto spatial = run_pipeline(stack, dirs3, cfg);
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 40; ++i) {
      ASSERT_EQ(spatial.enhanced(i, j, 1), planar.enhanced(i, j, 0)) << i << "," << j;
      for (int w = 1; w <= 6; ++w) ASSERT_EQ(spatial.stack[w](i, j, 1), planar.stack[w](i, j, 0));
    }
}

TEST(Pipeline, EnhancesTwoDCurve) {
  SynthParams p;
  p.dims = {64, 64, 1};
  p.curve_thickness = 3;
  p.noise_sigma = 0.25;
  p.clutter_density = 0.02;
  p.seed = 11;
  const auto s = make_curve_image_2d(p);
  PipelineConfig cfg;
  cfg.epsilon = 4.5;
  const auto r = run_pipeline(s.image, cfg);
  double on = 0, off = 0;
  int n_on = 0, n_off = 0;
  for (std::size_t n = 0; n < s.truth.size(); ++n) {
    if (s.truth[n] > 0) {
      on += r.enhanced[n];
      ++n_on;
    } else {
      off += r.enhanced[n];
      ++n_off;
    }
  }
  EXPECT_GE(on / n_on, 3.0 * off / n_off);
}

TEST(Pipeline, InvertTurnsDarkCurvesBright) {
  Volume bright({16, 16, 16});
  for (int i = 0; i < 16; ++i) bright(i, 8, 8) = 1.0f;
  Volume dark = bright;
  for (float& x : dark.values()) x = 5.0f - 4.0f * x;  // dark line on bright background
  PipelineConfig cfg;
  cfg.epsilon = 4;
  cfg.k_directions = 16;
  cfg.mode = CombineMode::LinePair;
  const auto plain = run_pipeline(bright, cfg);
  cfg.invert = true;
  const auto inv = run_pipeline(dark, cfg);
  EXPECT_EQ(invert_intensity(dark), [&] {
    Volume w = bright;
    for (float& x : w.values()) x *= 4.0f;
    return w;
  }());
  EXPECT_GT(inv.enhanced(8, 8, 8), inv.enhanced(8, 3, 3));
  EXPECT_GT(plain.enhanced(8, 8, 8), plain.enhanced(8, 3, 3));
}

TEST(Pipeline, RejectsBadConfig) {
  PipelineConfig cfg;
  cfg.epsilon = -1;
  EXPECT_THROW(run_pipeline(Volume({4, 4, 4}), cfg), InvalidArgument);
  cfg.epsilon = 3;
  EXPECT_THROW(run_pipeline(Volume({4, 4, 4}), directions_2d(8), cfg), DimensionMismatch);
}

}  // namespace
}  // namespace oft
