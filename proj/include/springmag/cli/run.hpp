#pragma once

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "springmag/cli/config.hpp"
#include "springmag/cli/io.hpp"
#include "springmag/equilibrium.hpp"
#include "springmag/observables.hpp"
#include "springmag/sweep.hpp"

namespace springmag::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_nonconvergence = 2,
  exit_usage = 64,
  exit_io = 74,
};

struct RunOptions {
  std::string out_dir = ".";
  bool trace = false; // per-step trace for relax, per-record lines otherwise
};

namespace detail {

inline std::string out_path(const RunOptions &o, const std::string &name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

inline ChainState initial_state(const ExperimentConfig &c,
                                const MaterialStack &stack) {
  if (c.initial == "random") {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> n01;
    ChainState st;
    for (std::size_t i = 0; i < stack.size(); ++i) {
      Vec3 v{};
      while (norm(v) < 1e-3)
        v = {n01(rng), n01(rng), n01(rng)};
      st.spins.push_back(Spin::normalize(v));
    }
    return st;
  }
  if (c.initial == "snapshot") {
    Snapshot s = parse_snapshot(read_file(c.snapshot_in), c.snapshot_in);
    if (s.state.size() != stack.size())
      throw ConfigError("experiment.snapshot_in",
                        "snapshot layer count does not match the stack");
    return s.state;
  }
  return uniform_state(stack, 0.0, 0.0);
}

inline std::vector<SweepDirection> directions(const ExperimentConfig &c) {
  switch (c.directions) {
  case Directions::increasing:
    return {SweepDirection::increasing};
  case Directions::decreasing:
    return {SweepDirection::decreasing};
  default:
    return {SweepDirection::increasing, SweepDirection::decreasing};
  }
}

inline const char *name(SweepDirection d) {
  return d == SweepDirection::increasing ? "increasing" : "decreasing";
}

inline std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline int run_relax(const ExperimentConfig &c, const MaterialStack &stack,
                     const RunOptions &o, std::ostream &log) {
  const AppliedField applied{c.H_a, c.theta_a * deg};
  std::string trace_text;
  TraceSink sink;
  RelaxCriteria criteria = c.relax;
  if (o.trace) {
    criteria.record_energy = true;
    trace_text = header(c, "relax trace", "step,time,residual,energy",
                        "1,reduced,1,erg/cm^2");
    sink = [&](const TraceEntry &e) {
      trace_text += csv({std::to_string(e.step), num(e.time), num(e.residual),
                         num(e.energy)}) +
                    "\n";
    };
  }
  const RelaxResult r =
      relax(stack, initial_state(c, stack), applied, criteria, c.step, sink);

  SweepRecord rec;
  rec.theta_a = applied.angle;
  rec.profile = angle_profile(r.state);
  rec.torque = torque_density(stack, rec.profile, applied);
  rec.mag_angle = magnetization_angle(stack, rec.profile);
  rec.chirality = chirality(rec.profile, stack);
  rec.equilibration_time = r.equilibration_time;
  rec.steps = r.steps;
  rec.converged = r.converged;
  rec.residual = r.final_residual;

  write_file(out_path(o, "result.csv"),
             format_sweep(c, {rec}, stack.size(), "relax"));
  write_file(out_path(o, "profile.csv"), format_profile(c, rec.profile));
  Snapshot snap{fingerprint_hex(c), c, applied, r.final_residual, r.state};
  write_file(out_path(o, "snapshot.csv"), format_snapshot(snap));
  if (o.trace)
    write_file(out_path(o, "trace.csv"), trace_text);

  log << "steps = " << r.steps << ", equilibration_time = "
      << num(r.equilibration_time) << ", residual = " << num(r.final_residual)
      << (r.converged ? "" : " (not converged)") << "\n";
  return r.converged ? exit_ok : exit_nonconvergence;
}

/// Runs the configured sweep directions. Returns the record sets in order.
inline std::vector<std::pair<SweepDirection, std::vector<SweepRecord>>>
run_sweeps(const ExperimentConfig &c, const MaterialStack &stack,
           const RunOptions &o, std::ostream &log) {
  std::vector<std::pair<SweepDirection, std::vector<SweepRecord>>> out;
  for (SweepDirection dir : directions(c)) {
    RecordSink sink;
    if (o.trace)
      sink = [&](const SweepRecord &r) {
        log << name(dir) << " theta_a = " << fmt("%.3f", r.theta_a / deg)
            << " steps = " << r.steps << " time = " << num(r.equilibration_time)
            << " residual = " << num(r.residual) << "\n";
      };
    out.emplace_back(dir, rotational_sweep(stack, c.schedule(dir), c.relax,
                                           c.step, sink));
  }
  return out;
}

inline bool all_converged(
    const std::vector<std::pair<SweepDirection, std::vector<SweepRecord>>> &sets) {
  for (const auto &[dir, recs] : sets)
    for (const SweepRecord &r : recs)
      if (!r.converged)
        return false;
  return true;
}

inline int run_sweep(const ExperimentConfig &c, const MaterialStack &stack,
                     const RunOptions &o, std::ostream &log) {
  const auto sets = run_sweeps(c, stack, o, log);
  for (const auto &[dir, recs] : sets) {
    const std::string file = std::string("sweep_") + name(dir) + ".csv";
    write_file(out_path(o, file), format_sweep(c, recs, stack.size()));
    std::size_t flips = 0;
    for (std::size_t k = 1; k < recs.size(); ++k)
      if (is_chirality_flip(recs[k - 1], recs[k], stack))
        ++flips;
    log << file << ": " << recs.size() << " records, " << flips
        << " chirality flip(s)\n";
  }
  if (sets.size() == 2)
    log << "loop width = "
        << fmt("%.3f", loop_width(sets[0].second, sets[1].second, stack) / deg)
        << " deg\n";
  return all_converged(sets) ? exit_ok : exit_nonconvergence;
}

inline int run_curve(const ExperimentConfig &c, const MaterialStack &stack,
                     const RunOptions &o, std::ostream &log) {
  const bool torque = c.kind == ExperimentKind::torque_curve;
  const auto sets = run_sweeps(c, stack, o, log);
  std::string text = header(
      c, torque ? "torque curve" : "angle curve",
      torque ? "direction,theta_a_deg,torque" : "direction,theta_a_deg,alpha_deg",
      torque ? "1,deg,erg/cm^2" : "1,deg,deg");
  for (const auto &[dir, recs] : sets) {
    const std::string d = dir == SweepDirection::increasing ? "+1" : "-1";
    if (torque) {
      const TorqueCurve tc = torque_curve(recs);
      for (std::size_t k = 0; k < tc.theta_a.size(); ++k)
        text += csv({d, num(tc.theta_a[k] / deg), num(tc.T[k])}) + "\n";
    } else {
      const AngleCurve ac = angle_curve(recs);
      for (std::size_t k = 0; k < ac.theta_a.size(); ++k)
        text += csv({d, num(ac.theta_a[k] / deg), num(ac.alpha[k] / deg)}) + "\n";
    }
  }
  const std::string file = torque ? "torque_curve.csv" : "angle_curve.csv";
  write_file(out_path(o, file), text);
  log << file << " written\n";
  return all_converged(sets) ? exit_ok : exit_nonconvergence;
}

inline int run_critical_angle(const ExperimentConfig &c,
                              const MaterialStack &stack, const RunOptions &o,
                              std::ostream &log) {
  const CriticalAngleResult r = locate_critical_angle(
      stack, c.H_a, {c.bracket_lo * deg, c.bracket_hi * deg}, c.tol * deg,
      c.relax, c.step, c.coarse_step * deg);
  write_file(out_path(o, "critical_angle.csv"),
             header(c, "critical angle", "H_a,theta_c_deg", "Oe,deg") +
                 csv({num(c.H_a), num(r.theta_c / deg)}) + "\n");
  log << "theta_c = " << fmt("%.4f", r.theta_c / deg) << " deg\n";
  return r.nonconverged == 0 ? exit_ok : exit_nonconvergence;
}

inline int run_critical_fields(const ExperimentConfig &c,
                               const MaterialStack &stack, const RunOptions &o,
                               std::ostream &log) {
  const CriticalReport rep =
      find_critical_fields(stack, {c.H_lo, c.H_hi}, c.H_tol, c.relax, c.step,
                           c.critical_options());
  const auto opt = [](const std::optional<double> &v) {
    return v ? num(*v) : std::string();
  };
  std::vector<std::string> extra = {"H_c1 = " + opt(rep.H_c1),
                                    "H_c2 = " + opt(rep.H_c2),
                                    "H_c3 = " + opt(rep.H_c3)};
  std::string text = header(c, "critical fields", "H_a,theta_c_deg,loop_width_deg",
                            "Oe,deg,deg", extra);
  for (std::size_t k = 0; k < rep.H_samples.size(); ++k)
    text += csv({num(rep.H_samples[k]),
                 rep.theta_c[k] ? num(*rep.theta_c[k] / deg) : std::string(),
                 num(rep.loop_width[k] / deg)}) +
            "\n";
  write_file(out_path(o, "critical_fields.csv"), text);
  for (const std::string &e : extra)
    log << e << (e.back() == ' ' ? "(not bracketed)" : " Oe") << "\n";
  return rep.nonconverged == 0 ? exit_ok : exit_nonconvergence;
}

} // namespace detail

/// Executes one experiment and writes its files into `o.out_dir`. Returns an
/// ExitCode; library validation errors propagate to the caller.
inline int run(const ExperimentConfig &c, const RunOptions &o, std::ostream &log) {
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec)
    throw IoError(o.out_dir, "cannot create output directory: " + ec.message());
  const MaterialStack stack = c.stack.build();
  switch (c.kind) {
  case ExperimentKind::relax:
    return detail::run_relax(c, stack, o, log);
  case ExperimentKind::sweep:
    return detail::run_sweep(c, stack, o, log);
  case ExperimentKind::torque_curve:
  case ExperimentKind::angle_curve:
    return detail::run_curve(c, stack, o, log);
  case ExperimentKind::critical_angle:
    return detail::run_critical_angle(c, stack, o, log);
  case ExperimentKind::critical_fields:
    return detail::run_critical_fields(c, stack, o, log);
  }
  return exit_usage;
}

} // namespace springmag::cli
