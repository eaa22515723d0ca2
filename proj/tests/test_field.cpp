#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "springmag/field.hpp"
#include "springmag/model.hpp"
#include "test_util.hpp"

using namespace springmag;

TEST(EffectiveField, SaturatedChainWithoutFieldIsFieldFree) {
  const MaterialStack s = standard_bilayer();
  const FieldSet f = effective_field(s, uniform_state(s, 0, 0), {0.0, 0.0});
  for (const Vec3 &h : f.H)
    EXPECT_EQ(h, (Vec3{0, 0, 0}));
  EXPECT_EQ(f.max_magnitude, 0.0);
}

TEST(EffectiveField, SoftLayerAnisotropyTerm) {
  const MaterialStack s = single_layer(2e-8, 1.0e3, 1700.0, false);
  ChainState st;
  st.spins = {Spin::from_unit(e_y)};
  const FieldSet f = effective_field(s, st, {0.0, 0.0});
  // -(2 K / M) e_y
  EXPECT_NEAR(f.H[0].y, -2.0e3 / 1700.0, 1e-14);
  EXPECT_NEAR(f.H[0].y, -1.1765, 1e-4);
  EXPECT_EQ(f.H[0].x, 0.0);
  EXPECT_EQ(f.H[0].z, 0.0);
}

TEST(EffectiveField, DemagnetizationOfOutOfPlaneSpin) {
  const MaterialStack s = single_layer(2e-8, 0.0, 1700.0, false);
  ChainState st;
  st.spins = {Spin::from_unit(e_z)};
  const FieldSet f = effective_field(s, st, {0.0, 0.0});
  EXPECT_NEAR(f.H[0].z, -4.0 * std::numbers::pi * 1700.0, 1e-9);
  EXPECT_NEAR(f.H[0].z, -21362.8, 0.05);
  EXPECT_NEAR(f.max_magnitude, 21362.83, 0.01);
}

TEST(EffectiveField, MaxMagnitudeMatchesLargestField) {
  std::mt19937_64 rng(5);
  const MaterialStack s = standard_bilayer(6, 6);
  const ChainState st = testutil::random_state(s.size(), rng, 1.0);
  const FieldSet f = effective_field(s, st, {4800.0, 0.3});
  double m = 0.0;
  for (const Vec3 &h : f.H)
    m = std::max(m, norm(h));
  EXPECT_EQ(f.max_magnitude, m);
}

TEST(EffectiveField, OnlyDemagnetizationWithoutCouplings) {
  std::mt19937_64 rng(9);
  MaterialStack s = standard_bilayer(3, 3);
  std::fill(s.J.begin(), s.J.end(), 0.0);
  std::fill(s.K.begin(), s.K.end(), 0.0);
  const ChainState st = testutil::random_state(s.size(), rng, 1.0);
  const FieldSet f = effective_field(s, st, {0.0, 0.0});
  for (const Vec3 &h : f.H) {
    EXPECT_EQ(h.x, 0.0);
    EXPECT_EQ(h.y, 0.0);
  }
}

TEST(EffectiveField, EquivariantUnderMirrorReflection) {
  std::mt19937_64 rng(21);
  const MaterialStack s = standard_bilayer(8, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const ChainState st = testutil::random_state(s.size(), rng, 1.0);
    ChainState mirrored = st;
    for (Spin &m : mirrored.spins)
      m = Spin::from_unit({m.x(), -m.y(), m.z()});
    const double angle = 2.0 * std::numbers::pi * trial / 50.0;
    const FieldSet f = effective_field(s, st, {4800.0, angle});
    const FieldSet g = effective_field(s, mirrored, {4800.0, -angle});
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double scale = 1e-12 * (1.0 + norm(f.H[i]));
      EXPECT_NEAR(g.H[i].x, f.H[i].x, scale);
      EXPECT_NEAR(g.H[i].y, -f.H[i].y, scale);
      EXPECT_NEAR(g.H[i].z, f.H[i].z, scale);
    }
  }
}

TEST(FieldSplit, SeparatesInPlaneAndNormalParts) {
  FieldSet f;
  f.H = {{3, 4, 5}, {-1, 2, -7}};
  const FieldComponents c = field_split(f);
  EXPECT_EQ(c.in_plane[0], (Vec3{3, 4, 0}));
  EXPECT_EQ(c.out_of_plane[0], 5.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_EQ(c.in_plane[i] + c.out_of_plane[i] * e_z, f.H[i]);

  const MaterialStack s = standard_bilayer(4, 4);
  const FieldComponents sat =
      field_split(effective_field(s, uniform_state(s, 0, 0), {4800.0, 1.0}));
  for (double z : sat.out_of_plane)
    EXPECT_EQ(z, 0.0);
}

TEST(TotalEnergy, SaturatedGroundStateIsZero) {
  const MaterialStack s = standard_bilayer();
  EXPECT_EQ(total_energy(s, uniform_state(s, 0, 0), {0.0, 0.0}), 0.0);
}

TEST(TotalEnergy, HardAxisStateKeepsOnlyAnisotropy) {
  const MaterialStack s = standard_bilayer();
  const double e = total_energy(s, uniform_state(s, std::numbers::pi / 2, 0),
                                {0.0, 0.0});
  // d (115 K_h + 100 K_s) = 2e-8 * (5.75e9 + 1e5)
  EXPECT_NEAR(e, 115.002, 1e-9);
}

TEST(TotalEnergy, NegativeGradientIsTheEffectiveField) {
  std::mt19937_64 rng(1234);
  const MaterialStack s = standard_bilayer(10, 10);
  for (int trial = 0; trial < 20; ++trial) {
    const ChainState st = testutil::random_state(s.size(), rng, 1.0);
    const AppliedField ha{4800.0, 0.7 * trial};
    const FieldSet f = effective_field(s, st, ha);
    const auto check = testutil::gradient_check(s, st, ha, f, 1e-6);
    EXPECT_LT(check.worst_relative, 1e-6) << "trial " << trial;
  }
}
