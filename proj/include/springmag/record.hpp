#pragma once

#include <cstddef>

#include "springmag/model.hpp"

namespace springmag {

/// Equilibrium summary at one applied-field direction of a rotational sweep.
struct SweepRecord {
  double theta_a = 0.0;            // rad
  AngleProfile profile;            // unwrapped against the previous record
  double torque = 0.0;             // erg/cm^2
  double mag_angle = 0.0;          // rad, branch-continuous along the sweep
  int chirality = 0;               // -1, 0, +1
  double equilibration_time = 0.0; // reduced units
  std::size_t steps = 0;
  bool converged = false;
  double residual = 0.0;
  ChainState state; // equilibrium spins, kept for warm starts and snapshots
};

} // namespace springmag
