#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "springmag/errors.hpp"
#include "springmag/field.hpp"
#include "springmag/model.hpp"
#include "springmag/vec3.hpp"

namespace springmag {

/// Damping and time-step policy. Time is in reduced units (gyromagnetic
/// prefactor scaled to 1), so a spin in a field H precesses at angular rate H.
struct StepParams {
  double g = 0.5;                    // dimensionless damping
  double dt = 1e-2;                  // fixed step used by chain_step
  std::size_t steps_per_period = 64; // precession resolution for select_dt
  double dt_max = 1e-2;              // step used when every field vanishes
  double stiffness_fraction = 0.75;  // see stable_dt()

  void validate() const {
    if (!(g >= 0.0))
      throw ValidationError("g", "must be >= 0");
    if (!(dt > 0.0))
      throw ValidationError("dt", "must be > 0");
    if (steps_per_period < 4)
      throw ValidationError("steps_per_period", "must be >= 4");
    if (!(dt_max > 0.0))
      throw ValidationError("dt_max", "must be > 0");
    if (!(stiffness_fraction > 0.0 && stiffness_fraction <= 1.0))
      throw ValidationError("stiffness_fraction", "must be in (0, 1]");
  }
};

namespace detail {

/// Closed-form flow of m' = -H [m x h + g m x (m x h)] for a frozen field,
/// without the final renormalization.
///
/// Writing u = m.h and v = m - u h, the exact solution after time dt is
///   u(dt) = (u cosh x + sinh x) / (cosh x + u sinh x),   x = g H dt,
///   v(dt) = R(H dt) v / (cosh x + u sinh x),
/// with R a rotation about h. Numerator and denominator are scaled by e^-x
/// and expressed through p = 1 + u and q = 1 - u so that neither overflows
/// for large x nor cancels near u = -1.
inline Vec3 exact_flow(const Vec3 &m, const Vec3 &H, double g, double dt) {
  const double Hmag = norm(H);
  if (Hmag == 0.0)
    return m;
  const Vec3 h = H / Hmag;
  const Vec3 v = cross(cross(h, m), h); // m - u h, exactly 0 when m = +-h
  const double p = 0.5 * norm2(m + h); // 1 + u
  const double q = 0.5 * norm2(m - h); // 1 - u
  const double x = g * Hmag * dt;
  const double ex = std::exp(-x);
  const double e2 = ex * ex;
  const double denom = p + q * e2; // 2 e^-x (cosh x + u sinh x)
  if (denom == 0.0)
    return m; // m == -h exactly: unstable fixed point
  const double along = (p - q * e2) / denom;
  const double shrink = 2.0 * ex / denom;
  const double phase = Hmag * dt;
  const Vec3 rotated = std::cos(phase) * v + std::sin(phase) * cross(h, v);
  return along * h + shrink * rotated;
}

inline Vec3 llg_rhs(const Vec3 &m, const Vec3 &H, double g) {
  const Vec3 mxH = cross(m, H);
  return -(mxH + g * cross(m, mxH));
}

} // namespace detail

/// Advances one spin by `dt` in the frozen field `H` using the exact
/// precession-damping propagator. Unconditionally stable; the result is
/// renormalized to remove roundoff drift.
inline Spin llg_step_exact(const Spin &m, const Vec3 &H, double g, double dt) {
  constexpr double lo = (1.0 - 1e-9) * (1.0 - 1e-9);
  constexpr double hi = (1.0 + 1e-9) * (1.0 + 1e-9);
  const double n2 = norm2(m.vec());
  if (!(n2 >= lo && n2 <= hi))
    throw ContractViolation("llg_step_exact: input spin is not unit length");
  if (!(dt > 0.0))
    throw ContractViolation("llg_step_exact: dt must be > 0");
  if (!(g >= 0.0))
    throw ContractViolation("llg_step_exact: g must be >= 0");
  return Spin::normalize(detail::exact_flow(m.vec(), H, g, dt));
}

/// Classical RK4 on the same frozen-field equation, renormalizing after every
/// substep. Only used as an independent reference for llg_step_exact.
inline Spin llg_step_rk4(const Spin &m, const Vec3 &H, double g, double dt,
                         std::size_t substeps) {
  if (substeps < 1)
    throw ContractViolation("llg_step_rk4: substeps must be >= 1");
  const double h = dt / static_cast<double>(substeps);
  Vec3 y = m.vec();
  for (std::size_t s = 0; s < substeps; ++s) {
    const Vec3 k1 = detail::llg_rhs(y, H, g);
    const Vec3 k2 = detail::llg_rhs(y + 0.5 * h * k1, H, g);
    const Vec3 k3 = detail::llg_rhs(y + 0.5 * h * k2, H, g);
    const Vec3 k4 = detail::llg_rhs(y + h * k3, H, g);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    y = normalized(y);
  }
  return Spin::normalize(y);
}

/// Step size that resolves the fastest precession in the chain with
/// `steps_per_period` steps per revolution.
inline double select_dt(const FieldSet &fields, const StepParams &params) {
  if (params.steps_per_period < 4)
    throw ValidationError("steps_per_period", "must be >= 4");
  if (!(fields.max_magnitude > 0.0))
    return params.dt_max;
  const double period_fraction =
      2.0 * std::numbers::pi / static_cast<double>(params.steps_per_period);
  return period_fraction / fields.max_magnitude;
}

/// Upper bound on the linearized precession rate of any chain mode:
/// max_i [2 (J_{i,i-1} + J_{i,i+1}) + 2 K_i] / M_i + D_zz M_i. The shortest
/// spin wave (neighbours in antiphase) precesses this fast even when the
/// instantaneous fields of a smooth state are small.
inline double stiffness_rate(const MaterialStack &stack) {
  const std::size_t n = stack.size();
  double rate = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double j = 0.0;
    if (i > 0)
      j += stack.J[i - 1];
    if (i + 1 < n)
      j += stack.J[i];
    const double r = (2.0 * j + 2.0 * stack.K[i]) / stack.M[i] +
                     stack.demag_coeff * stack.M[i];
    rate = std::max(rate, r);
  }
  return rate;
}

/// Largest step for which the Jacobi coupling between neighbours stays
/// linearly stable. Neighbour fields are frozen over a step, so a mode of
/// rate w is amplified by |1 - (g - i) w dt| per step, which stays below one
/// only for w dt < 2g / (1 + g^2).
inline double stable_dt(const MaterialStack &stack, const StepParams &params) {
  const double rate = stiffness_rate(stack);
  if (!(rate > 0.0))
    return params.dt_max;
  const double g = params.g;
  const double limit = g > 0.0 ? 2.0 * g / (1.0 + g * g) : 1.0;
  return params.stiffness_fraction * limit / rate;
}

/// select_dt() further capped by stable_dt(). This is the policy relax() uses.
inline double select_dt(const MaterialStack &stack, const FieldSet &fields,
                        const StepParams &params) {
  return std::min(select_dt(fields, params), stable_dt(stack, params));
}

/// Jacobi update with precomputed fields: every spin is advanced in its own
/// frozen field. `fields` must have been evaluated on `state`.
inline void chain_step(const ChainState &state, const FieldSet &fields,
                       double g, double dt, ChainState &out) {
  const std::size_t n = state.size();
  out.spins.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.spins[i] = llg_step_exact(state.spins[i], fields.H[i], g, dt);
  out.time = state.time + dt;
}

/// One time step of the whole chain: fields are evaluated once on `state`,
/// then every spin moves with llg_step_exact over `params.dt`.
inline ChainState chain_step(const MaterialStack &stack,
                             const ChainState &state,
                             const AppliedField &applied,
                             const StepParams &params) {
  const FieldSet fields = effective_field(stack, state, applied);
  ChainState out;
  chain_step(state, fields, params.g, params.dt, out);
  return out;
}

} // namespace springmag
