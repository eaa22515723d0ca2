#pragma once

// Domain types for a layered hard/soft film modelled as a chain of unit spins,
// one spin per atomic layer. Layer 1 is the deepest hard layer, layer
// n_hard is the hard side of the interface, layer N is the top soft layer.
// Indices in code are 0-based; layer i lives at index i - 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "springmag/errors.hpp"
#include "springmag/vec3.hpp"

namespace springmag {

/// Unit vector giving the direction of one layer's moment.
class Spin {
public:
  Spin() = default;

  /// Rescales `v` onto the unit sphere.
  static Spin normalize(const Vec3 &v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n))
      throw ContractViolation("Spin::normalize: vector has no direction");
    return Spin((1.0 / n) * v);
  }

  /// Accepts `v` as-is after checking it is unit length within `tol`.
  static Spin from_unit(const Vec3 &v, double tol = 1e-9) {
    if (!(std::abs(norm(v) - 1.0) <= tol))
      throw ContractViolation("Spin::from_unit: |m| deviates from 1");
    return Spin(v);
  }

  /// Polar form: m = (cos phi cos theta, cos phi sin theta, sin phi).
  static Spin from_angles(double theta, double phi) {
    return Spin({std::cos(phi) * std::cos(theta),
                 std::cos(phi) * std::sin(theta), std::sin(phi)});
  }

  const Vec3 &vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x; }
  double y() const noexcept { return v_.y; }
  double z() const noexcept { return v_.z; }

  friend bool operator==(const Spin &, const Spin &) = default;

private:
  explicit Spin(const Vec3 &v) : v_(v) {}
  Vec3 v_{1.0, 0.0, 0.0};
};

/// Exchange stiffness A (erg/cm), anisotropy K (erg/cm^3) and saturation
/// magnetization M (emu/cm^3) of one material.
struct MaterialParams {
  double A = 0.0;
  double K = 0.0;
  double M = 0.0;
};

namespace materials {
// Room-temperature values used for the Sm-Co / Fe bilayer.
inline constexpr MaterialParams SmCo{1.2e-6, 5.0e7, 550.0};
inline constexpr MaterialParams Fe{2.8e-6, 1.0e3, 1700.0};
inline constexpr double interface_A = 1.8e-6;
inline constexpr double layer_thickness = 2.0e-8; // 2 angstrom
} // namespace materials

struct MaterialStack {
  std::size_t n_hard = 0;
  std::size_t n_soft = 0;
  double d = 0.0;          // layer thickness, cm
  std::vector<double> M;   // per layer, emu/cm^3
  std::vector<double> K;   // per layer, erg/cm^3
  std::vector<double> J;   // per bond (i, i+1), erg/cm^3, size N-1
  double demag_coeff = 4.0 * std::numbers::pi;

  std::size_t size() const noexcept { return n_hard + n_soft; }

  /// Throws ValidationError naming the first broken invariant.
  void validate() const {
    const std::size_t n = size();
    if (n < 1)
      throw ValidationError("n_hard+n_soft", "must be >= 1");
    if (!(d > 0.0))
      throw ValidationError("d", "must be > 0");
    if (M.size() != n)
      throw ValidationError("M", "length must equal the layer count");
    if (K.size() != n)
      throw ValidationError("K", "length must equal the layer count");
    if (J.size() != n - 1)
      throw ValidationError("J", "length must equal the layer count - 1");
    for (double v : M)
      if (!(v > 0.0))
        throw ValidationError("M", "must be > 0");
    for (double v : K)
      if (!(v >= 0.0))
        throw ValidationError("K", "must be >= 0");
    for (double v : J)
      if (!(v >= 0.0))
        throw ValidationError("J", "must be >= 0");
    if (!(demag_coeff >= 0.0))
      throw ValidationError("demag_coeff", "must be >= 0");
  }
};

/// Builds a hard/soft bilayer. Exchange couplings follow J = A / d^2, with the
/// interface bond (n_hard, n_hard + 1) using `interface_A`.
inline MaterialStack build_stack(std::size_t n_hard, std::size_t n_soft,
                                 double d, const MaterialParams &hard,
                                 const MaterialParams &soft,
                                 double interface_A) {
  if (n_hard < 1)
    throw ValidationError("n_hard", "must be >= 1");
  if (n_soft < 1)
    throw ValidationError("n_soft", "must be >= 1");
  if (!(d > 0.0))
    throw ValidationError("d", "must be > 0");
  const auto check = [](const MaterialParams &p, const std::string &which) {
    if (!(p.A > 0.0))
      throw ValidationError(which + ".A", "must be > 0");
    if (!(p.K >= 0.0))
      throw ValidationError(which + ".K", "must be >= 0");
    if (!(p.M > 0.0))
      throw ValidationError(which + ".M", "must be > 0");
  };
  check(hard, "hard");
  check(soft, "soft");
  if (!(interface_A > 0.0))
    throw ValidationError("interface.A", "must be > 0");

  MaterialStack s;
  s.n_hard = n_hard;
  s.n_soft = n_soft;
  s.d = d;
  const std::size_t n = n_hard + n_soft;
  s.M.resize(n);
  s.K.resize(n);
  s.J.resize(n - 1);
  const double d2 = d * d;
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_hard = i < n_hard;
    s.M[i] = is_hard ? hard.M : soft.M;
    s.K[i] = is_hard ? hard.K : soft.K;
  }
  for (std::size_t b = 0; b + 1 < n; ++b) {
    // bond b couples layers b+1 and b+2 (1-based)
    if (b + 1 < n_hard)
      s.J[b] = hard.A / d2;
    else if (b + 1 == n_hard)
      s.J[b] = interface_A / d2;
    else
      s.J[b] = soft.A / d2;
  }
  return s;
}

/// One isolated layer (no exchange bonds). Used for single-spin problems.
inline MaterialStack single_layer(double d, double K, double M,
                                  bool hard = true) {
  MaterialStack s;
  s.n_hard = hard ? 1 : 0;
  s.n_soft = hard ? 0 : 1;
  s.d = d;
  s.M = {M};
  s.K = {K};
  s.validate();
  return s;
}

/// The 115 Sm-Co / 100 Fe bilayer with 2 angstrom layers.
inline MaterialStack standard_bilayer(std::size_t n_hard = 115,
                                      std::size_t n_soft = 100) {
  return build_stack(n_hard, n_soft, materials::layer_thickness,
                     materials::SmCo, materials::Fe, materials::interface_A);
}

struct ChainState {
  std::vector<Spin> spins;
  double time = 0.0; // reduced units

  std::size_t size() const noexcept { return spins.size(); }
};

/// In-plane applied field; direction (cos angle, sin angle, 0).
struct AppliedField {
  double magnitude = 0.0; // Oe
  double angle = 0.0;     // rad

  Vec3 direction() const { return {std::cos(angle), std::sin(angle), 0.0}; }
  Vec3 vector() const { return magnitude * direction(); }
};

struct AngleProfile {
  std::vector<double> theta; // in-plane angle, unwrapped, rad
  std::vector<double> phi;   // out-of-plane angle, rad

  std::size_t size() const noexcept { return theta.size(); }
};

inline ChainState uniform_state(const MaterialStack &stack, double theta,
                                double phi) {
  ChainState st;
  st.spins.assign(stack.size(), Spin::from_angles(theta, phi));
  st.time = 0.0;
  return st;
}

namespace detail {
/// Representative of `angle` modulo 2 pi closest to `target`.
inline double nearest_branch(double angle, double target) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return angle + two_pi * std::round((target - angle) / two_pi);
}
} // namespace detail

/// In-plane and out-of-plane angles of every layer.
///
/// The layer-1 angle is placed on the branch closest to `reference` (when
/// given) or on the principal branch (-pi, pi]. Every following layer takes
/// the branch closest to its lower neighbour, so adjacent layers never differ
/// by pi or more and the profile encodes the chain's winding.
inline AngleProfile angle_profile(const ChainState &state,
                                  const AngleProfile *reference = nullptr) {
  const std::size_t n = state.size();
  if (reference && reference->size() != n)
    throw ValidationError("reference", "length must match the chain");
  AngleProfile p;
  p.theta.resize(n);
  p.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Spin &m = state.spins[i];
    if (m.x() == 0.0 && m.y() == 0.0)
      throw AngleUndefined("angle_profile: layer " + std::to_string(i + 1) +
                           " has no in-plane component");
    const double raw = std::atan2(m.y(), m.x());
    if (i == 0)
      p.theta[0] =
          reference ? detail::nearest_branch(raw, reference->theta[0]) : raw;
    else
      p.theta[i] = detail::nearest_branch(raw, p.theta[i - 1]);
    p.phi[i] = std::asin(std::clamp(m.z(), -1.0, 1.0));
  }
  return p;
}

inline AngleProfile angle_profile(const ChainState &state,
                                  const std::optional<AngleProfile> &reference) {
  return angle_profile(state, reference ? &*reference : nullptr);
}

inline constexpr double default_chirality_threshold = 1e-3;

/// Sign of the net winding across the soft region, theta_N - theta_{n_hard}.
/// Windings smaller than `threshold` report 0.
inline int chirality(const AngleProfile &profile, const MaterialStack &stack,
                     double threshold = default_chirality_threshold) {
  if (profile.size() != stack.size())
    throw ValidationError("profile", "length must equal the layer count");
  if (profile.size() == 0)
    return 0;
  const std::size_t base = stack.n_hard > 0 ? stack.n_hard - 1 : 0;
  const double winding = profile.theta.back() - profile.theta[base];
  if (std::abs(winding) < threshold)
    return 0;
  return winding > 0.0 ? 1 : -1;
}

} // namespace springmag
