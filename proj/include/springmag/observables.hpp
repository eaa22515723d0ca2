#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "springmag/errors.hpp"
#include "springmag/model.hpp"
#include "springmag/record.hpp"

namespace springmag {

struct TorqueCurve {
  std::vector<double> theta_a; // rad
  std::vector<double> T;       // erg/cm^2
};

struct AngleCurve {
  std::vector<double> theta_a; // rad
  std::vector<double> alpha;   // rad
};

/// Torque per unit film area exerted by the applied field,
/// T = H_a d sum_i M_i sin(theta_a - theta_i).
inline double torque_density(const MaterialStack &stack,
                             const AngleProfile &profile,
                             const AppliedField &applied) {
  if (profile.size() != stack.size())
    throw ValidationError("profile", "length must equal the layer count");
  double s = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i)
    s += stack.M[i] * std::sin(applied.angle - profile.theta[i]);
  return applied.magnitude * stack.d * s;
}

/// Direction of the net in-plane moment, atan2(sum M sin, sum M cos). With a
/// `previous` value the result is moved onto the branch closest to it.
inline double magnetization_angle(const MaterialStack &stack,
                                  const AngleProfile &profile,
                                  std::optional<double> previous = {}) {
  if (profile.size() != stack.size())
    throw ValidationError("profile", "length must equal the layer count");
  double sx = 0.0;
  double sy = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    sx += stack.M[i] * std::cos(profile.theta[i]);
    sy += stack.M[i] * std::sin(profile.theta[i]);
    total += stack.M[i];
  }
  // cancellation leaves only roundoff below this
  if (std::hypot(sx, sy) <= 1e-12 * total)
    throw AngleUndefined("magnetization_angle: net in-plane moment is zero");
  const double a = std::atan2(sy, sx);
  return previous ? detail::nearest_branch(a, *previous) : a;
}

namespace detail {

struct Branch {
  std::vector<double> x; // ascending theta_a
  std::vector<double> y;
};

inline Branch branch_of(const std::vector<SweepRecord> &recs, std::size_t layer) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(recs.size());
  for (const SweepRecord &r : recs)
    pts.emplace_back(r.theta_a, r.profile.theta.at(layer));
  std::sort(pts.begin(), pts.end());
  Branch b;
  for (const auto &[x, y] : pts) {
    b.x.push_back(x);
    b.y.push_back(y);
  }
  return b;
}

inline constexpr double grid_eps = 1e-9;

inline double interpolate(const Branch &b, double x) {
  const auto it = std::lower_bound(b.x.begin(), b.x.end(), x - grid_eps);
  const auto k = static_cast<std::size_t>(it - b.x.begin());
  if (k < b.x.size() && std::abs(b.x[k] - x) <= grid_eps)
    return b.y[k];
  if (k == 0)
    return b.y.front();
  if (k >= b.x.size())
    return b.y.back();
  const double w = (x - b.x[k - 1]) / (b.x[k] - b.x[k - 1]);
  return (1.0 - w) * b.y[k - 1] + w * b.y[k];
}

inline void check_same_range(const std::vector<SweepRecord> &inc,
                             const std::vector<SweepRecord> &dec) {
  if (inc.empty() || dec.empty())
    throw ValidationError("records", "both branches must be non-empty");
  const auto range = [](const std::vector<SweepRecord> &r) {
    const auto [lo, hi] = std::minmax_element(
        r.begin(), r.end(), [](const SweepRecord &p, const SweepRecord &q) {
          return p.theta_a < q.theta_a;
        });
    return std::pair{lo->theta_a, hi->theta_a};
  };
  const auto [a0, a1] = range(inc);
  const auto [b0, b1] = range(dec);
  if (std::abs(a0 - b0) > grid_eps || std::abs(a1 - b1) > grid_eps)
    throw ValidationError("records", "branches must cover the same theta_a range");
}

} // namespace detail

/// Both sweep directions of one layer, each sorted by theta_a.
struct LayerHysteresis {
  std::size_t layer = 0; // 1-based
  std::vector<double> theta_a_inc, theta_inc;
  std::vector<double> theta_a_dec, theta_dec;
};

/// Extracts theta_layer(theta_a) from an increasing and a decreasing sweep.
/// `layer` is 1-based.
inline LayerHysteresis layer_hysteresis(const std::vector<SweepRecord> &inc,
                                        const std::vector<SweepRecord> &dec,
                                        std::size_t layer) {
  detail::check_same_range(inc, dec);
  const std::size_t n = inc.front().profile.size();
  if (layer < 1 || layer > n)
    throw ValidationError("layer", "must be in 1..N");
  for (const auto *recs : {&inc, &dec})
    for (const SweepRecord &r : *recs)
      if (r.profile.size() != n)
        throw ValidationError("records", "profiles must have equal length");
  detail::Branch bi = detail::branch_of(inc, layer - 1);
  detail::Branch bd = detail::branch_of(dec, layer - 1);
  LayerHysteresis out;
  out.layer = layer;
  out.theta_a_inc = std::move(bi.x);
  out.theta_inc = std::move(bi.y);
  out.theta_a_dec = std::move(bd.x);
  out.theta_dec = std::move(bd.y);
  return out;
}

/// Torque density of each record, in sweep order.
inline TorqueCurve torque_curve(const std::vector<SweepRecord> &recs) {
  TorqueCurve c;
  for (const SweepRecord &r : recs) {
    c.theta_a.push_back(r.theta_a);
    c.T.push_back(r.torque);
  }
  return c;
}

inline AngleCurve angle_curve(const std::vector<SweepRecord> &recs) {
  AngleCurve c;
  for (const SweepRecord &r : recs) {
    c.theta_a.push_back(r.theta_a);
    c.alpha.push_back(r.mag_angle);
  }
  return c;
}

} // namespace springmag
