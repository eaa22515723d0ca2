#pragma once

// Rotational-field experiments: the applied field keeps its strength while
// its direction is stepped, each equilibrium warm-starting the next
// (continuation). Irreversible jumps between branches produce rotational
// hysteresis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "springmag/equilibrium.hpp"
#include "springmag/errors.hpp"
#include "springmag/model.hpp"
#include "springmag/observables.hpp"
#include "springmag/record.hpp"

namespace springmag {

inline constexpr double deg = std::numbers::pi / 180.0;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class SweepDirection { increasing, decreasing };

struct SweepSchedule {
  double H_a = 0.0; // Oe
  double theta_start = 0.0;
  double theta_end = two_pi;
  double coarse_step = 1.0 * deg;
  double refine_step = 0.1 * deg; // used between records that jump
  SweepDirection direction = SweepDirection::increasing;

  /// Full turn, 0 -> 2 pi or 2 pi -> 0.
  static SweepSchedule full_turn(double H_a, SweepDirection dir) {
    SweepSchedule s;
    s.H_a = H_a;
    s.direction = dir;
    if (dir == SweepDirection::decreasing)
      std::swap(s.theta_start, s.theta_end);
    return s;
  }

  double sign() const {
    return direction == SweepDirection::increasing ? 1.0 : -1.0;
  }

  void validate() const {
    if (!(H_a >= 0.0))
      throw ValidationError("H_a", "must be >= 0");
    if (!(coarse_step > 0.0))
      throw ValidationError("coarse_step", "must be > 0");
    if (!(refine_step > 0.0))
      throw ValidationError("refine_step", "must be > 0");
    if (refine_step > coarse_step)
      throw ValidationError("refine_step", "must be <= coarse_step");
    if (sign() * (theta_end - theta_start) <= 0.0)
      throw ValidationError("theta_end",
                            "must lie beyond theta_start in the sweep direction");
  }
};

/// Knobs for deciding when consecutive records are discontinuous.
struct JumpDetection {
  double chirality_threshold = default_chirality_threshold; // rad
  /// A chirality flip needs the soft-region winding to change by more than
  /// this; smaller sign changes are the chain passing smoothly through zero.
  double flip_winding_change = std::numbers::pi / 2.0;
  /// Records whose angles move by more than jump_factor * coarse_step in any
  /// layer are treated as a jump and the interval is re-swept at refine_step.
  double jump_factor = 10.0;
};

namespace detail {

inline double soft_winding(const AngleProfile &p, const MaterialStack &stack) {
  const std::size_t base = stack.n_hard > 0 ? stack.n_hard - 1 : 0;
  return p.theta.back() - p.theta[base];
}

inline double max_layer_change(const AngleProfile &a, const AngleProfile &b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.theta[i] - b.theta[i]));
  return worst;
}

} // namespace detail

/// True when `next` is on the opposite-handed branch from `prev`.
inline bool is_chirality_flip(const SweepRecord &prev, const SweepRecord &next,
                              const MaterialStack &stack,
                              const JumpDetection &jd = {}) {
  if (prev.chirality * next.chirality >= 0)
    return false;
  const double change = detail::soft_winding(next.profile, stack) -
                        detail::soft_winding(prev.profile, stack);
  return std::abs(change) > jd.flip_winding_change;
}

/// Relaxes warm-started equilibria for one field strength and produces
/// records. Apart from its configuration it only keeps relaxation counters.
class SweepRunner {
public:
  SweepRunner(const MaterialStack &stack, double H_a,
              const RelaxCriteria &criteria, const StepParams &step,
              const JumpDetection &jd = {})
      : stack_(stack), H_a_(H_a), criteria_(criteria), step_(step), jd_(jd) {
    stack_.validate();
    criteria_.validate();
    step_.validate();
  }

  const MaterialStack &stack() const noexcept { return stack_; }
  double field() const noexcept { return H_a_; }
  const JumpDetection &detection() const noexcept { return jd_; }
  std::size_t relaxations() const noexcept { return relaxations_; }
  std::size_t nonconverged() const noexcept { return nonconverged_; }

  /// Relaxes the saturated state (all spins on the easy axis) at `theta_a`.
  SweepRecord from_saturation(double theta_a) const {
    return finish(relax_at(uniform_state(stack_, 0.0, 0.0), theta_a), theta_a,
                  nullptr);
  }

  /// Relaxes at `theta_a` starting from the equilibrium in `prev`.
  SweepRecord advance(const SweepRecord &prev, double theta_a) const {
    return finish(relax_at(prev.state, theta_a), theta_a, &prev);
  }

  bool is_jump(const SweepRecord &prev, const SweepRecord &next,
               double coarse_step) const {
    return is_chirality_flip(prev, next, stack_, jd_) ||
           detail::max_layer_change(prev.profile, next.profile) >
               jd_.jump_factor * coarse_step;
  }

private:
  RelaxResult relax_at(const ChainState &initial, double theta_a) const {
    RelaxResult r = relax(stack_, initial, AppliedField{H_a_, theta_a},
                          criteria_, step_);
    ++relaxations_;
    if (!r.converged)
      ++nonconverged_;
    return r;
  }

  SweepRecord finish(RelaxResult r, double theta_a,
                     const SweepRecord *prev) const {
    SweepRecord rec;
    rec.theta_a = theta_a;
    rec.profile = angle_profile(r.state, prev ? &prev->profile : nullptr);
    const AppliedField applied{H_a_, theta_a};
    rec.torque = torque_density(stack_, rec.profile, applied);
    rec.mag_angle = magnetization_angle(
        stack_, rec.profile,
        prev ? std::optional<double>(prev->mag_angle) : std::nullopt);
    rec.chirality = chirality(rec.profile, stack_, jd_.chirality_threshold);
    rec.equilibration_time = r.equilibration_time;
    rec.steps = r.steps;
    rec.converged = r.converged;
    rec.residual = r.final_residual;
    rec.state = std::move(r.state);
    return rec;
  }

  MaterialStack stack_;
  double H_a_;
  RelaxCriteria criteria_;
  StepParams step_;
  JumpDetection jd_;
  mutable std::size_t relaxations_ = 0;
  mutable std::size_t nonconverged_ = 0;
};

using RecordSink = std::function<void(const SweepRecord &)>;

/// Coarse grid of a schedule: start, start +- coarse, ..., end.
inline std::vector<double> coarse_grid(const SweepSchedule &s) {
  const double span = std::abs(s.theta_end - s.theta_start);
  const auto n = static_cast<std::size_t>(std::ceil(span / s.coarse_step - 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    grid.push_back(k == n ? s.theta_end
                          : s.theta_start +
                                s.sign() * static_cast<double>(k) * s.coarse_step);
  return grid;
}

/// Continuation sweep. The first record relaxes the saturated state at
/// theta_start; each later record warm-starts from its predecessor. When two
/// consecutive coarse records jump, the interval between them is re-swept at
/// refine_step from the earlier record, so the jump is located on the fine
/// grid. Non-converged relaxations are kept with converged = false.
inline std::vector<SweepRecord>
rotational_sweep(const MaterialStack &stack, const SweepSchedule &schedule,
                 const RelaxCriteria &criteria, const StepParams &step,
                 const RecordSink &sink = {}, const JumpDetection &jd = {}) {
  schedule.validate();
  const SweepRunner runner(stack, schedule.H_a, criteria, step, jd);
  const std::vector<double> grid = coarse_grid(schedule);

  std::vector<SweepRecord> out;
  const auto emit = [&](SweepRecord r) {
    if (sink)
      sink(r);
    out.push_back(std::move(r));
  };

  emit(runner.from_saturation(grid.front()));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const SweepRecord &prev = out.back();
    SweepRecord next = runner.advance(prev, grid[k]);
    const double interval = std::abs(grid[k] - grid[k - 1]);
    if (schedule.refine_step < interval &&
        runner.is_jump(prev, next, schedule.coarse_step)) {
      const auto m = static_cast<std::size_t>(
          std::ceil(interval / schedule.refine_step - 1e-9));
      for (std::size_t j = 1; j < m; ++j) {
        const double th = grid[k - 1] + schedule.sign() *
                                            static_cast<double>(j) *
                                            schedule.refine_step;
        emit(runner.advance(out.back(), th));
      }
      next = runner.advance(out.back(), grid[k]);
    }
    emit(std::move(next));
  }
  return out;
}

struct CriticalAngleResult {
  double theta_c = 0.0; // rad
  std::size_t relaxations = 0;
  std::size_t nonconverged = 0;
};

/// Locates the applied-field direction at which the chain's chirality flips
/// for field strength `H_a`.
///
/// The field is swept by continuation from saturation (from 0 for an
/// increasing bracket lo < hi, from 2 pi for a decreasing one) to `lo`, then
/// across the bracket in coarse steps until a flip appears. The flip interval
/// is bisected: each midpoint is relaxed from the last equilibrium known to lie
/// on the original branch. Throws NotFound when nothing flips inside the
/// bracket.
inline CriticalAngleResult
locate_critical_angle(const MaterialStack &stack, double H_a,
                      std::pair<double, double> bracket, double tol,
                      const RelaxCriteria &criteria, const StepParams &step,
                      double coarse_step = 1.0 * deg,
                      const JumpDetection &jd = {}) {
  const auto [lo, hi] = bracket;
  if (!(tol > 0.0))
    throw ValidationError("tol", "must be > 0");
  if (lo == hi)
    throw ValidationError("bracket", "must have nonzero width");
  if (!(coarse_step > 0.0))
    throw ValidationError("coarse_step", "must be > 0");
  const double sign = hi > lo ? 1.0 : -1.0;
  const SweepRunner runner(stack, H_a, criteria, step, jd);

  const double start = sign > 0 ? std::min(0.0, lo) : std::max(two_pi, lo);
  SweepRecord cur = runner.from_saturation(start);
  double th = start;
  while (sign * (lo - th) > 1e-12) {
    th = sign > 0 ? std::min(th + coarse_step, lo) : std::max(th - coarse_step, lo);
    cur = runner.advance(cur, th);
  }

  // coarse scan across the bracket
  double a = lo;
  double b = lo;
  bool found = false;
  while (sign * (hi - a) > 1e-12) {
    b = sign > 0 ? std::min(a + coarse_step, hi) : std::max(a - coarse_step, hi);
    SweepRecord next = runner.advance(cur, b);
    if (is_chirality_flip(cur, next, stack, jd)) {
      found = true;
      break;
    }
    cur = std::move(next);
    a = b;
  }
  if (!found)
    throw NotFound("find_critical_angle: no chirality flip in bracket");

  while (std::abs(b - a) > tol) {
    const double mid = 0.5 * (a + b);
    SweepRecord r = runner.advance(cur, mid);
    if (is_chirality_flip(cur, r, stack, jd)) {
      b = mid;
    } else {
      cur = std::move(r);
      a = mid;
    }
  }
  return {0.5 * (a + b), runner.relaxations(), runner.nonconverged()};
}

inline double find_critical_angle(const MaterialStack &stack, double H_a,
                                  std::pair<double, double> bracket, double tol,
                                  const RelaxCriteria &criteria,
                                  const StepParams &step,
                                  double coarse_step = 1.0 * deg,
                                  const JumpDetection &jd = {}) {
  return locate_critical_angle(stack, H_a, bracket, tol, criteria, step,
                               coarse_step, jd)
      .theta_c;
}

inline constexpr double default_loop_tolerance = 1e-3; // rad

/// Angular extent of the rotational hysteresis loop: the measure of the set of
/// field directions at which the two sweep directions leave layer `layer`
/// (1-based; 0 selects the interface layer n_hard) at angles differing by more
/// than `tol`. Both branches are evaluated on the union of their grids, using
/// linear interpolation where a branch has no record of its own.
inline double loop_width(const std::vector<SweepRecord> &inc,
                         const std::vector<SweepRecord> &dec,
                         const MaterialStack &stack, std::size_t layer = 0,
                         double tol = default_loop_tolerance) {
  detail::check_same_range(inc, dec);
  if (layer == 0)
    layer = std::max<std::size_t>(stack.n_hard, 1);
  if (layer > stack.size())
    throw ValidationError("layer", "must be in 1..N");
  const detail::Branch bi = detail::branch_of(inc, layer - 1);
  const detail::Branch bd = detail::branch_of(dec, layer - 1);

  std::vector<double> grid = bi.x;
  grid.insert(grid.end(), bd.x.begin(), bd.x.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double p, double q) {
                           return std::abs(p - q) <= detail::grid_eps;
                         }),
             grid.end());

  std::vector<bool> differs(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    differs[k] = std::abs(detail::interpolate(bi, grid[k]) -
                          detail::interpolate(bd, grid[k])) > tol;
  double width = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double len = grid[k + 1] - grid[k];
    width += 0.5 * len * (static_cast<double>(differs[k]) +
                          static_cast<double>(differs[k + 1]));
  }
  return width;
}

/// Decreasing-sweep records predicted from an increasing sweep by the mirror
/// reflection y -> -y: theta_i(theta_a) -> -theta_i(2 pi - theta_a).
inline std::vector<SweepRecord> mirror_records(const std::vector<SweepRecord> &recs) {
  std::vector<SweepRecord> out;
  out.reserve(recs.size());
  for (const SweepRecord &r : recs) {
    SweepRecord m;
    m.theta_a = two_pi - r.theta_a;
    m.profile = r.profile;
    for (double &t : m.profile.theta)
      t = -t;
    for (double &p : m.profile.phi)
      p = -p;
    m.torque = -r.torque;
    m.mag_angle = -r.mag_angle;
    m.chirality = -r.chirality;
    m.equilibration_time = r.equilibration_time;
    m.steps = r.steps;
    m.converged = r.converged;
    m.residual = r.residual;
    out.push_back(std::move(m));
  }
  return out;
}

/// Field-strength thresholds of the rotational hysteresis together with the
/// per-field samples they were bracketed from.
struct CriticalReport {
  std::vector<double> H_samples;  // Oe
  std::vector<std::optional<double>> theta_c; // first flip per sample, rad
  std::vector<double> loop_width; // rad, per sample
  std::optional<double> H_c1;     // onset of chirality flips
  std::optional<double> H_c2;     // loop-width discontinuity
  std::optional<double> H_c3;     // onset of full-length transitions
  std::size_t nonconverged = 0;   // relaxations that hit max_steps, all sweeps
};

struct CriticalFieldOptions {
  std::size_t samples = 11;         // evenly spaced H_a values over the range
  double coarse_step = 2.0 * deg;   // sweep resolution per sample
  double refine_step = 0.2 * deg;
  double width_drop = 0.25;         // relative loop-width drop that marks H_c2
  double hard_angle = 10.0 * deg;   // layer-1 excursion that marks H_c3
};

/// One full-turn increasing sweep summarised for critical-field detection.
struct RotationSummary {
  std::optional<double> theta_c; // first chirality flip, rad
  bool any_flip = false;
  double loop_width = 0.0;      // rad, decreasing branch from mirror symmetry
  double max_hard_angle = 0.0;  // max |theta_1| over the sweep
  std::size_t nonconverged = 0;
};

inline RotationSummary summarize_rotation(const MaterialStack &stack,
                                          double H_a,
                                          const RelaxCriteria &criteria,
                                          const StepParams &step,
                                          const CriticalFieldOptions &opt,
                                          const JumpDetection &jd = {}) {
  SweepSchedule sch = SweepSchedule::full_turn(H_a, SweepDirection::increasing);
  sch.coarse_step = opt.coarse_step;
  sch.refine_step = opt.refine_step;
  const auto recs = rotational_sweep(stack, sch, criteria, step, {}, jd);
  RotationSummary s;
  for (std::size_t k = 1; k < recs.size(); ++k) {
    if (is_chirality_flip(recs[k - 1], recs[k], stack, jd)) {
      s.any_flip = true;
      if (!s.theta_c)
        s.theta_c = 0.5 * (recs[k - 1].theta_a + recs[k].theta_a);
    }
  }
  for (const SweepRecord &r : recs) {
    s.max_hard_angle = std::max(s.max_hard_angle, std::abs(r.profile.theta[0]));
    if (!r.converged)
      ++s.nonconverged;
  }
  s.loop_width = loop_width(recs, mirror_records(recs), stack);
  return s;
}

/// Locates H_c1, H_c2 and H_c3 inside `H_range`.
///
/// The range is sampled evenly; each sample is a full increasing sweep whose
/// decreasing partner follows from mirror symmetry. Each threshold is first
/// bracketed between adjacent samples and then bisected to `tol`:
///   H_c1  first field with a chirality flip during the turn,
///   H_c2  first relative loop-width drop larger than width_drop,
///   H_c3  first field where layer 1 leaves the easy axis by more than
///         hard_angle while no chirality flip occurs.
/// Thresholds not bracketed by the samples are left empty.
inline CriticalReport find_critical_fields(const MaterialStack &stack,
                                           std::pair<double, double> H_range,
                                           double tol,
                                           const RelaxCriteria &criteria,
                                           const StepParams &step,
                                           const CriticalFieldOptions &opt = {},
                                           const JumpDetection &jd = {}) {
  const auto [H_lo, H_hi] = H_range;
  if (!(H_lo >= 0.0 && H_hi > H_lo))
    throw ValidationError("H_range", "must satisfy 0 <= lo < hi");
  if (opt.samples < 2)
    throw ValidationError("samples", "must be >= 2");
  if (!(tol > 0.0))
    throw ValidationError("tol", "must be > 0");

  CriticalReport rep;
  const auto summarize = [&](double H) {
    RotationSummary s = summarize_rotation(stack, H, criteria, step, opt, jd);
    rep.nonconverged += s.nonconverged;
    return s;
  };

  std::vector<RotationSummary> sums;
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const double H = H_lo + (H_hi - H_lo) * static_cast<double>(k) /
                                static_cast<double>(opt.samples - 1);
    sums.push_back(summarize(H));
    rep.H_samples.push_back(H);
    rep.theta_c.push_back(sums.back().theta_c);
    rep.loop_width.push_back(sums.back().loop_width);
  }

  // Bisects between samples a (predicate false) and b (predicate true).
  const auto bisect = [&](double a, double b, auto &&pred) {
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      (pred(mid) ? b : a) = mid;
    }
    return 0.5 * (a + b);
  };

  const auto is_full_length = [&](const RotationSummary &s) {
    return s.max_hard_angle > opt.hard_angle && !s.any_flip;
  };

  for (std::size_t k = 1; k < sums.size(); ++k) {
    if (!rep.H_c1 && !sums[k - 1].any_flip && sums[k].any_flip && k > 0)
      rep.H_c1 = bisect(rep.H_samples[k - 1], rep.H_samples[k],
                        [&](double H) { return summarize(H).any_flip; });
  }
  if (!rep.H_c1 && sums.front().any_flip)
    rep.H_c1 = rep.H_samples.front(); // already hysteretic at the range start

  for (std::size_t k = 1; k < sums.size() && rep.H_c1; ++k) {
    const double w0 = sums[k - 1].loop_width;
    const double w1 = sums[k].loop_width;
    if (sums[k - 1].any_flip && w0 > 0.0 && (w0 - w1) / w0 > opt.width_drop) {
      double a = rep.H_samples[k - 1];
      double b = rep.H_samples[k];
      double wa = w0;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        const double wm = summarize(mid).loop_width;
        if (wa > 0.0 && (wa - wm) / wa > opt.width_drop) {
          b = mid;
        } else {
          a = mid;
          wa = wm;
        }
      }
      rep.H_c2 = 0.5 * (a + b);
      break;
    }
  }

  for (std::size_t k = 1; k < sums.size(); ++k) {
    if (!is_full_length(sums[k - 1]) && is_full_length(sums[k])) {
      rep.H_c3 = bisect(rep.H_samples[k - 1], rep.H_samples[k],
                        [&](double H) { return is_full_length(summarize(H)); });
      break;
    }
  }
  return rep;
}

} // namespace springmag
