#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "springmag/equilibrium.hpp"
#include "test_util.hpp"

using namespace springmag;

namespace {
constexpr double pi = std::numbers::pi;

ChainState one_spin(const Spin &m) {
  ChainState st;
  st.spins = {m};
  return st;
}
} // namespace

TEST(Residual, MeasuresWorstMisalignment) {
  FieldSet f;
  f.H = {{10, 0, 0}, {0, 10, 0}};
  ChainState st;
  st.spins = {Spin::from_unit(e_x), Spin::from_unit(e_x)};
  EXPECT_DOUBLE_EQ(residual(st, f, 1.0), 1.0);
  // a weak field is measured against the floor
  f.H = {{0, 0.25, 0}, {1, 0, 0}};
  EXPECT_DOUBLE_EQ(residual(st, f, 1.0), 0.25);
  // antiparallel spins are stationary
  f.H = {{-5, 0, 0}, {3, 0, 0}};
  EXPECT_EQ(residual(st, f, 1.0), 0.0);
  f.H = {{1, 0, 0}};
  EXPECT_THROW(residual(st, f, 1.0), ValidationError);
}

TEST(Relax, AlignedSpinNeedsNoSteps) {
  const MaterialStack s = single_layer(2e-8, 1.0e3, 1700.0, false);
  const RelaxResult r = relax(s, one_spin(Spin::from_unit(e_x)), {4800.0, 0.0},
                              RelaxCriteria{}, StepParams{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(r.equilibration_time, 0.0);
  EXPECT_EQ(r.state.spins[0], Spin::from_unit(e_x));
}

TEST(Relax, SoftSpinFollowsPerpendicularField) {
  // 2 K / M is far below H_a, so the spin ends on the field axis
  const MaterialStack s = single_layer(2e-8, 1.0e3, 1700.0, false);
  const RelaxResult r = relax(s, one_spin(Spin::from_unit(e_x)),
                              {4800.0, pi / 2}, RelaxCriteria{}, StepParams{});
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.steps, 0u);
  EXPECT_NEAR(angle_profile(r.state).theta[0], pi / 2, 1e-6);
  EXPECT_LT(std::abs(r.state.spins[0].z()), 1e-6);
}

TEST(Relax, HardSpinMatchesGridMinimisedEnergy) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> field(0.0, 1.0e4);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  const MaterialStack s = single_layer(2e-8, 5.0e7, 550.0);
  for (int k = 0; k < 50; ++k) {
    const double H = field(rng);
    const double ta = angle(rng);
    const RelaxResult r = relax(s, one_spin(Spin::from_unit(e_x)), {H, ta},
                                RelaxCriteria{}, StepParams{});
    ASSERT_TRUE(r.converged);
    const double want = testutil::sw_grid_minimum(5.0e7, 550.0, H, ta);
    const double got = angle_profile(r.state).theta[0];
    EXPECT_NEAR(std::remainder(got - want, 2 * pi), 0.0, 1e-3)
        << "H = " << H << " theta_a = " << ta;
  }
}

TEST(Relax, SoftSpinSwitchesAboveItsCoercivity) {
  // A reversed field larger than 2K/M (~1.18 Oe) flips a lone Fe spin; the
  // oracle walk starts on the same side.
  const MaterialStack s = single_layer(2e-8, 1.0e3, 1700.0, false);
  const double ta = pi - 0.2;
  const RelaxResult r = relax(s, one_spin(Spin::from_unit(e_x)), {5.0, ta},
                              RelaxCriteria{}, StepParams{});
  ASSERT_TRUE(r.converged);
  const double want = testutil::sw_grid_minimum(1.0e3, 1700.0, 5.0, ta);
  EXPECT_NEAR(std::remainder(angle_profile(r.state).theta[0] - want, 2 * pi),
              0.0, 1e-3);
}

TEST(Relax, ConvergedStateIsAFixedPointOfRelax) {
  const MaterialStack s = standard_bilayer(6, 8);
  const AppliedField ha{4800.0, 2.0};
  const RelaxResult first =
      relax(s, uniform_state(s, 0, 0), ha, RelaxCriteria{}, StepParams{});
  ASSERT_TRUE(first.converged);
  const RelaxResult again =
      relax(s, first.state, ha, RelaxCriteria{}, StepParams{});
  EXPECT_EQ(again.steps, 0u);
  for (std::size_t i = 0; i < s.size(); ++i)
    EXPECT_EQ(again.state.spins[i], first.state.spins[i]);
}

TEST(Relax, InPlaneFieldsGiveInPlaneEquilibria) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  const MaterialStack s = standard_bilayer(5, 10);
  for (int trial = 0; trial < 5; ++trial) {
    const ChainState st = testutil::random_state(s.size(), rng, 0.2);
    const RelaxResult r = relax(s, st, {3000.0, angle(rng)}, RelaxCriteria{},
                                StepParams{});
    ASSERT_TRUE(r.converged);
    for (const Spin &m : r.state.spins)
      EXPECT_LT(std::abs(m.z()), 1e-6);
  }
}

TEST(Relax, ReportsNonConvergenceAtStepLimit) {
  const MaterialStack s = standard_bilayer(4, 4);
  RelaxCriteria rc;
  rc.max_steps = 10;
  const RelaxResult r =
      relax(s, uniform_state(s, 0, 0), {4800.0, 1.0}, rc, StepParams{});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.steps, 10u);
  EXPECT_GT(r.final_residual, rc.torque_tol);
  EXPECT_GT(r.equilibration_time, 0.0);
}

TEST(Relax, TraceIsOrderedAndEnergyDoesNotRise) {
  const MaterialStack s = standard_bilayer(6, 8);
  RelaxCriteria rc;
  rc.record_energy = true;
  std::vector<TraceEntry> trace;
  const RelaxResult r =
      relax(s, uniform_state(s, 0, 0), {4800.0, 2.5}, rc, StepParams{},
            [&](const TraceEntry &e) { trace.push_back(e); });
  ASSERT_TRUE(r.converged);
  ASSERT_EQ(trace.size(), r.steps + 1);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    EXPECT_EQ(trace[k].step, k);
    EXPECT_GT(trace[k].time, trace[k - 1].time);
    EXPECT_LE(trace[k].energy, trace[k - 1].energy + 1e-9);
  }
  EXPECT_EQ(trace.back().residual, r.final_residual);
}

TEST(Relax, RejectsInvalidSettings) {
  const MaterialStack s = standard_bilayer(2, 2);
  const ChainState st = uniform_state(s, 0, 0);
  RelaxCriteria rc;
  rc.torque_tol = 0.0;
  EXPECT_THROW(relax(s, st, {1.0, 0.0}, rc, StepParams{}), ValidationError);
  StepParams sp;
  sp.g = -1.0;
  EXPECT_THROW(relax(s, st, {1.0, 0.0}, RelaxCriteria{}, sp), ValidationError);
  ChainState short_state = st;
  short_state.spins.pop_back();
  EXPECT_THROW(relax(s, short_state, {1.0, 0.0}, RelaxCriteria{}, StepParams{}),
               ValidationError);
}
