#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>

#include "springmag/errors.hpp"
#include "springmag/field.hpp"
#include "springmag/integrator.hpp"
#include "springmag/model.hpp"

namespace springmag {

/// Stopping rule for relax(). The residual is the largest normalized
/// transverse field, max_i |m_i x H_i| / max(|H_i|, H_floor), i.e. the sine
/// of the worst misalignment between a spin and its field.
struct RelaxCriteria {
  double torque_tol = 1e-8;
  double H_floor = 1.0; // Oe
  std::size_t max_steps = 10'000'000;
  bool record_energy = false; // fill TraceEntry::energy

  void validate() const {
    if (!(torque_tol > 0.0))
      throw ValidationError("torque_tol", "must be > 0");
    if (!(H_floor > 0.0))
      throw ValidationError("H_floor", "must be > 0");
    if (max_steps < 1)
      throw ValidationError("max_steps", "must be >= 1");
  }
};

struct RelaxResult {
  ChainState state;
  double equilibration_time = 0.0; // reduced units
  std::size_t steps = 0;
  bool converged = false;
  double final_residual = 0.0;
};

struct TraceEntry {
  std::size_t step = 0;
  double time = 0.0;
  double residual = 0.0;
  double energy = 0.0; // erg/cm^2, only when record_energy is set
};

using TraceSink = std::function<void(const TraceEntry &)>;

inline double residual(const ChainState &state, const FieldSet &fields,
                       double H_floor) {
  if (state.size() != fields.size())
    throw ValidationError("fields", "length must match the chain");
  // compared in squares; one sqrt at the end
  const double floor2 = H_floor * H_floor;
  double worst2 = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const Vec3 &H = fields.H[i];
    const double torque2 = norm2(cross(state.spins[i].vec(), H));
    worst2 = std::max(worst2, torque2 / std::max(norm2(H), floor2));
  }
  return std::sqrt(worst2);
}

/// Integrates the damped dynamics in a constant applied field until every
/// spin is aligned (or anti-aligned) with its effective field to within
/// `criteria.torque_tol`, re-selecting the step size from the current fields
/// before every step. Hitting max_steps returns converged = false.
inline RelaxResult relax(const MaterialStack &stack, const ChainState &initial,
                         const AppliedField &applied,
                         const RelaxCriteria &criteria, const StepParams &step,
                         const TraceSink &trace = {}) {
  criteria.validate();
  step.validate();
  detail::check_sizes(stack, initial);

  RelaxResult r;
  ChainState cur = initial;
  ChainState next;
  FieldSet fields;
  effective_field(stack, cur, applied, fields);
  double res = residual(cur, fields, criteria.H_floor);

  const auto emit = [&](std::size_t k) {
    if (!trace)
      return;
    TraceEntry e{k, cur.time, res, 0.0};
    if (criteria.record_energy)
      e.energy = total_energy(stack, cur, applied);
    trace(e);
  };
  emit(0);

  const double dt_cap = stable_dt(stack, step);
  std::size_t k = 0;
  while (res > criteria.torque_tol && k < criteria.max_steps) {
    const double dt = std::min(select_dt(fields, step), dt_cap);
    chain_step(cur, fields, step.g, dt, next);
    std::swap(cur, next);
    effective_field(stack, cur, applied, fields);
    res = residual(cur, fields, criteria.H_floor);
    ++k;
    emit(k);
  }

  r.equilibration_time = cur.time - initial.time;
  r.state = std::move(cur);
  r.steps = k;
  r.final_residual = res;
  r.converged = res <= criteria.torque_tol;
  return r;
}

} // namespace springmag
