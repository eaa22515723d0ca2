#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "springmag/equilibrium.hpp"
#include "springmag/field.hpp"
#include "springmag/integrator.hpp"
#include "test_util.hpp"

using namespace springmag;

namespace {
constexpr double pi = std::numbers::pi;

void expect_vec_near(const Vec3 &a, const Vec3 &b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}
} // namespace

TEST(ExactStep, ZeroFieldIsIdentity) {
  const Spin m = Spin::normalize({0.3, -0.4, 0.5});
  EXPECT_EQ(detail::exact_flow(m.vec(), {0, 0, 0}, 0.5, 1.0), m.vec());
  expect_vec_near(llg_step_exact(m, {0, 0, 0}, 0.5, 1.0).vec(), m.vec(), 1e-15);
}

TEST(ExactStep, ParallelAndAntiparallelAreFixed) {
  const Vec3 H{2.0, -1.0, 0.5};
  const Spin h = Spin::normalize(H);
  const Spin anti = Spin::normalize(-H);
  for (double dt : {1e-3, 1.0, 100.0}) {
    expect_vec_near(llg_step_exact(h, H, 0.5, dt).vec(), h.vec(), 1e-15);
    expect_vec_near(llg_step_exact(anti, H, 0.5, dt).vec(), anti.vec(), 1e-15);
  }
}

TEST(ExactStep, PurePrecessionQuarterTurn) {
  // m' = -(m x h): e_x precesses towards e_y about e_z.
  const double H = 3.0;
  const Spin out = llg_step_exact(Spin::from_unit(e_x), H * e_z, 0.0, (pi / 2) / H);
  expect_vec_near(out.vec(), e_y, 1e-15);
}

TEST(ExactStep, MatchesAnalyticSolutionAboutZAxis) {
  // For h = e_z and m(0) = e_x: m_z = tanh(g H t), the in-plane part has
  // length sech(g H t) and angle H t.
  const double g = 0.5, H = 1.0, dt = 0.3;
  const Spin out = llg_step_exact(Spin::from_unit(e_x), H * e_z, g, dt);
  const double x = g * H * dt;
  const Vec3 want{std::cos(H * dt) / std::cosh(x), std::sin(H * dt) / std::cosh(x),
                  std::tanh(x)};
  expect_vec_near(out.vec(), want, 1e-15);
  // same case against the RK4 oracle at oracle step 1e-5
  const Spin rk = llg_step_rk4(Spin::from_unit(e_x), H * e_z, g, dt, 30000);
  expect_vec_near(out.vec(), rk.vec(), 1e-8);
}

TEST(ExactStep, RejectsNonUnitInput) {
  // Spin::from_unit with a loose tolerance lets a slightly long vector in
  const Spin bad = Spin::from_unit({1.0 + 1e-6, 0.0, 0.0}, 1e-3);
  EXPECT_THROW(llg_step_exact(bad, e_z, 0.5, 0.1), ContractViolation);
  EXPECT_THROW(llg_step_exact(Spin::from_unit(e_x), e_z, 0.5, 0.0),
               ContractViolation);
  EXPECT_THROW(llg_step_exact(Spin::from_unit(e_x), e_z, -0.1, 0.1),
               ContractViolation);
}

TEST(ExactStep, PreservesNormWithoutRenormalization) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000000; ++k) {
    const Vec3 m = testutil::random_unit(rng);
    const Vec3 H = (0.1 + 1e4 * u01(rng)) * testutil::random_unit(rng);
    const double g = u01(rng);
    const double dt = 10.0 * u01(rng) / norm(H) + 1e-300;
    worst = std::max(worst, std::abs(norm(detail::exact_flow(m, H, g, dt)) - 1.0));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(ExactStep, StableForHugeSteps) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 20000; ++k) {
    const Spin m = Spin::normalize(testutil::random_unit(rng));
    const Vec3 H = (1.0 + 1e3 * u01(rng)) * testutil::random_unit(rng);
    const double dt = 1e3 * u01(rng) / norm(H) + 1e-12;
    const Spin out = llg_step_exact(m, H, u01(rng), dt);
    ASSERT_TRUE(std::isfinite(out.x()) && std::isfinite(out.y()) &&
                std::isfinite(out.z()));
    ASSERT_NEAR(norm(out.vec()), 1.0, 1e-15);
    const double u = dot(out.vec(), normalized(H));
    ASSERT_LE(std::abs(u), 1.0 + 1e-15);
  }
}

TEST(ExactStep, SemigroupUnderFrozenField) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const Spin m = Spin::normalize(testutil::random_unit(rng));
    const Vec3 H = (0.5 + 10.0 * u01(rng)) * testutil::random_unit(rng);
    const double g = u01(rng);
    const double a = u01(rng) / norm(H);
    const double b = u01(rng) / norm(H);
    const Spin once = llg_step_exact(m, H, g, a + b);
    const Spin twice = llg_step_exact(llg_step_exact(m, H, g, a), H, g, b);
    expect_vec_near(once.vec(), twice.vec(), 1e-12);
  }
}

TEST(ExactStep, AlignmentNeverDecreasesWithDamping) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    Spin m = Spin::normalize(testutil::random_unit(rng));
    const Vec3 H = (0.5 + 10.0 * u01(rng)) * testutil::random_unit(rng);
    const Vec3 h = normalized(H);
    const double g = 0.01 + u01(rng);
    for (int s = 0; s < 20; ++s) {
      const double before = dot(m.vec(), h);
      m = llg_step_exact(m, H, g, u01(rng) / norm(H));
      ASSERT_GE(dot(m.vec(), h), before - 1e-14);
    }
  }
}

TEST(Rk4Oracle, ZeroFieldAndPrecession) {
  const Spin m = Spin::normalize({0.1, 0.7, -0.2});
  EXPECT_EQ(llg_step_rk4(m, {0, 0, 0}, 0.5, 1.0, 10).vec(), m.vec());
  const Spin rot = llg_step_rk4(Spin::from_unit(e_x), 2.0 * e_z, 0.0, pi / 4, 1000);
  expect_vec_near(rot.vec(), e_y, 1e-10);
}

TEST(Rk4Oracle, FourthOrderConvergenceTowardsExactStep) {
  const Vec3 H{0.3, -0.2, 1.0};
  const double dt = 10.0 / norm(H);
  const Spin m = Spin::normalize({1.0, 0.5, -0.3});
  const Spin exact = llg_step_exact(m, H, 0.2, dt);
  std::vector<double> ns, errs;
  for (double n : {10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0}) {
    const Spin r = llg_step_rk4(m, H, 0.2, dt, static_cast<std::size_t>(n));
    ns.push_back(n);
    errs.push_back(norm(r.vec() - exact.vec()));
  }
  EXPECT_NEAR(testutil::loglog_slope(ns, errs), -4.0, 0.2);
}

TEST(SelectDt, ResolvesFastestPrecession) {
  StepParams p;
  p.steps_per_period = 64;
  FieldSet f;
  f.H = {{2 * pi, 0, 0}, {0, 1, 0}};
  f.max_magnitude = 2 * pi;
  EXPECT_DOUBLE_EQ(select_dt(f, p), 1.0 / 64.0);
  f.max_magnitude = 0.0;
  EXPECT_EQ(select_dt(f, p), p.dt_max);
}

TEST(SelectDt, HardLayersSetTheScaleOfTheSaturatedBilayer) {
  const MaterialStack s = standard_bilayer();
  const ChainState st = uniform_state(s, 0, 0);
  // saturated along e_x, field at 90 degrees: hard layers feel H_a plus the
  // y-restoring anisotropy only once tilted, so the largest field is H_a.
  const FieldSet f = effective_field(s, st, {4800.0, pi / 2});
  EXPECT_NEAR(f.max_magnitude, 4800.0, 1e-9);
  // after a small tilt the hard layers dominate with |H| ~ 2 K_h / M_h
  ChainState tilted = st;
  for (std::size_t i = 0; i < s.size(); ++i)
    tilted.spins[i] = Spin::from_angles(0.1, 0.0);
  const FieldSet g = effective_field(s, tilted, {4800.0, 0.0});
  std::size_t arg = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (norm(g.H[i]) > norm(g.H[arg]))
      arg = i;
  EXPECT_LT(arg, s.n_hard);
  const double expected =
      norm(Vec3{4800.0, -2.0 * 5.0e7 / 550.0 * std::sin(0.1), 0.0});
  EXPECT_NEAR(g.max_magnitude, expected, 1e-6 * expected);
  StepParams p;
  EXPECT_DOUBLE_EQ(select_dt(g, p), 2 * pi / 64 / expected);
}

TEST(StableDt, CapsStepByExchangeStiffness) {
  const MaterialStack s = standard_bilayer();
  // interface hard layer: 2 (J_h + J_hs) / M_h dominates
  const double rate = 2.0 * (3.0e9 + 4.5e9) / 550.0 + 2.0 * 5.0e7 / 550.0 +
                      4.0 * pi * 550.0;
  EXPECT_NEAR(stiffness_rate(s), rate, 1e-6 * rate);
  StepParams p;
  EXPECT_NEAR(stable_dt(s, p), 0.75 * 0.8 / rate, 1e-20);
  const FieldSet zero = effective_field(s, uniform_state(s, 0, 0), {0, 0});
  EXPECT_EQ(select_dt(s, zero, p), stable_dt(s, p));
}

TEST(ChainStep, SaturatedChainOnlyAdvancesTime) {
  const MaterialStack s = standard_bilayer(10, 10);
  const ChainState st = uniform_state(s, 0, 0);
  StepParams p;
  p.dt = 1e-6;
  const ChainState next = chain_step(s, st, {0.0, 0.0}, p);
  EXPECT_EQ(next.time, 1e-6);
  for (std::size_t i = 0; i < s.size(); ++i)
    EXPECT_EQ(next.spins[i], st.spins[i]);
}

TEST(ChainStep, SingleSpinReducesToExactStep) {
  const MaterialStack s = single_layer(2e-8, 5.0e7, 550.0);
  ChainState st;
  st.spins = {Spin::normalize({0.6, 0.7, 0.1})};
  StepParams p;
  p.dt = 3e-6;
  const AppliedField ha{4800.0, 1.2};
  const ChainState next = chain_step(s, st, ha, p);
  const FieldSet f = effective_field(s, st, ha);
  EXPECT_EQ(next.spins[0], llg_step_exact(st.spins[0], f.H[0], p.g, p.dt));
}

TEST(ChainStep, IndependentOfEvaluationOrder) {
  std::mt19937_64 rng(3);
  const MaterialStack s = standard_bilayer(5, 5);
  const ChainState st = testutil::random_state(s.size(), rng, 0.5);
  StepParams p;
  p.dt = 1e-9;
  const AppliedField ha{1000.0, 0.4};
  const ChainState fwd = chain_step(s, st, ha, p);
  const FieldSet f = effective_field(s, st, ha);
  for (std::size_t i = s.size(); i-- > 0;)
    EXPECT_EQ(fwd.spins[i], llg_step_exact(st.spins[i], f.H[i], p.g, p.dt));
}

TEST(ChainStep, ExchangeAlignsAntiparallelPair) {
  // Two soft spins, K = 0, no field. A small tilt breaks the exact
  // antiparallel symmetry; exchange then drives the pair colinear.
  MaterialStack s = build_stack(1, 1, 2e-8, materials::Fe, materials::Fe,
                                materials::Fe.A);
  std::fill(s.K.begin(), s.K.end(), 0.0);
  ChainState st;
  st.spins = {Spin::from_angles(0.0, 0.0), Spin::from_angles(pi - 0.01, 0.0)};
  RelaxCriteria rc;
  rc.torque_tol = 1e-10;
  const RelaxResult r = relax(s, st, {0.0, 0.0}, rc, StepParams{});
  ASSERT_TRUE(r.converged);
  EXPECT_GT(dot(r.state.spins[0].vec(), r.state.spins[1].vec()), 1.0 - 1e-9);
}

TEST(ChainStep, EnergyDescendsFromRandomInPlaneStates) {
  std::mt19937_64 rng(2024);
  const MaterialStack s = standard_bilayer();
  const AppliedField ha{4800.0, 1.0};
  StepParams p;
  p.steps_per_period = 32;
  for (int trial = 0; trial < 3; ++trial) {
    ChainState st = testutil::random_state(s.size(), rng, 0.0);
    double e = total_energy(s, st, ha);
    double worst_rise = 0.0;
    FieldSet f;
    ChainState next;
    for (int k = 0; k < 4000; ++k) {
      effective_field(s, st, ha, f);
      chain_step(st, f, p.g, select_dt(s, f, p), next);
      std::swap(st, next);
      const double en = total_energy(s, st, ha);
      worst_rise = std::max(worst_rise, en - e);
      e = en;
    }
    EXPECT_LT(worst_rise, 1e-9) << "trial " << trial;
  }
}
