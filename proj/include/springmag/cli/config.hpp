#pragma once

// Experiment definitions in INI form:
//
//   [stack]       n_hard, n_soft, d, hard_A, hard_K, hard_M, soft_A, soft_K,
//                 soft_M, interface_A
//   [dynamics]    g, steps_per_period, dt_max, stiffness_fraction
//   [relax]       torque_tol, H_floor, max_steps
//   [experiment]  kind plus kind-specific keys, angles in degrees
//
// Every key is optional except experiment.kind and the field strength(s) the
// kind needs. Defaults are the Sm-Co/Fe bilayer.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "springmag/equilibrium.hpp"
#include "springmag/errors.hpp"
#include "springmag/integrator.hpp"
#include "springmag/model.hpp"
#include "springmag/sweep.hpp"

namespace springmag::cli {

enum class ExperimentKind {
  relax,
  sweep,
  critical_angle,
  critical_fields,
  torque_curve,
  angle_curve
};

inline const std::vector<std::pair<ExperimentKind, std::string>> &kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::relax, "relax"},
      {ExperimentKind::sweep, "sweep"},
      {ExperimentKind::critical_angle, "critical-angle"},
      {ExperimentKind::critical_fields, "critical-fields"},
      {ExperimentKind::torque_curve, "torque-curve"},
      {ExperimentKind::angle_curve, "angle-curve"}};
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto &[kind, name] : kind_names())
    if (kind == k)
      return name;
  return "?";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s) {
  for (const auto &[kind, name] : kind_names())
    if (name == s)
      return kind;
  return std::nullopt;
}

enum class Directions { increasing, decreasing, both };

struct StackConfig {
  std::size_t n_hard = 115;
  std::size_t n_soft = 100;
  double d = materials::layer_thickness;
  MaterialParams hard = materials::SmCo;
  MaterialParams soft = materials::Fe;
  double interface_A = materials::interface_A;

  MaterialStack build() const {
    return build_stack(n_hard, n_soft, d, hard, soft, interface_A);
  }
};

struct ExperimentConfig {
  StackConfig stack;
  StepParams step;
  RelaxCriteria relax;
  ExperimentKind kind = ExperimentKind::relax;

  // [experiment], angles in degrees
  double H_a = 0.0;         // Oe; required except for critical-fields
  double theta_a = 0.0;     // relax
  std::string initial = "saturated"; // relax: saturated | random | snapshot
  std::string snapshot_in;           // relax with initial = snapshot
  std::uint64_t seed = 1;            // relax with initial = random
  double theta_start = 0.0;
  double theta_end = 360.0;
  double coarse_step = 1.0;
  double refine_step = 0.1;
  Directions directions = Directions::both;
  double bracket_lo = 0.0; // critical-angle
  double bracket_hi = 360.0;
  double tol = 0.01;
  double H_lo = 0.0; // critical-fields, Oe
  double H_hi = 0.0;
  double H_tol = 10.0;
  std::size_t samples = 11;
  double width_drop = 0.25;
  double hard_angle = 10.0;

  SweepSchedule schedule(SweepDirection dir) const {
    SweepSchedule s;
    s.H_a = H_a;
    s.direction = dir;
    s.theta_start = (dir == SweepDirection::increasing ? theta_start : theta_end) * deg;
    s.theta_end = (dir == SweepDirection::increasing ? theta_end : theta_start) * deg;
    s.coarse_step = coarse_step * deg;
    s.refine_step = refine_step * deg;
    return s;
  }

  CriticalFieldOptions critical_options() const {
    CriticalFieldOptions o;
    o.samples = samples;
    o.coarse_step = coarse_step * deg;
    o.refine_step = refine_step * deg;
    o.width_drop = width_drop;
    o.hard_angle = hard_angle * deg;
    return o;
  }
};

/// Raised for malformed or invalid configuration. `key` is "section.name".
class ConfigError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Entries = std::map<std::string, std::string>; // "section.key" -> value

template <class T> T parse_number(const std::string &key, const std::string &text) {
  T v{};
  const char *first = text.data();
  const char *last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError(key, "is not a valid number: '" + text + "'");
  return v;
}

inline const std::map<std::string, std::set<std::string>> &known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"stack",
       {"n_hard", "n_soft", "d", "hard_A", "hard_K", "hard_M", "soft_A",
        "soft_K", "soft_M", "interface_A"}},
      {"dynamics", {"g", "steps_per_period", "dt_max", "stiffness_fraction"}},
      {"relax", {"torque_tol", "H_floor", "max_steps"}},
      {"experiment",
       {"kind", "H_a", "theta_a", "initial", "snapshot_in", "seed",
        "theta_start", "theta_end", "coarse_step", "refine_step", "direction",
        "bracket_lo", "bracket_hi", "tol", "H_lo", "H_hi", "H_tol", "samples",
        "width_drop", "hard_angle"}}};
  return keys;
}

inline void check_known(const std::string &key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos)
    throw ConfigError(key, "keys must be written as section.name");
  const auto sec = known_keys().find(key.substr(0, dot));
  if (sec == known_keys().end())
    throw ConfigError(key, "unknown section '" + key.substr(0, dot) + "'");
  if (!sec->second.count(key.substr(dot + 1)))
    throw ConfigError(key, "unknown key");
}

inline Entries read_entries(const std::string &text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " +
                                    e.message());
  }
  Entries out;
  for (const auto &[section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(section, "values must live inside a [section]");
    if (!known_keys().count(section))
      throw ConfigError(section, "unknown section");
    for (const auto &[name, value] : body) {
      const std::string key = section + "." + name;
      check_known(key);
      out[key] = value.data();
    }
  }
  return out;
}

inline void require_positive(const std::string &key, double v) {
  if (!(v > 0.0))
    throw ConfigError(key, "must be > 0");
}

} // namespace detail

/// Applies one "section.key=value" override to the raw entries.
inline void apply_override(detail::Entries &entries, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(assignment, "override must have the form section.key=value");
  const std::string key = assignment.substr(0, eq);
  detail::check_known(key);
  entries[key] = assignment.substr(eq + 1);
}

/// Builds a validated config from raw entries. Errors name the offending key.
inline ExperimentConfig build_config(const detail::Entries &entries) {
  using detail::parse_number;
  ExperimentConfig c;
  const auto get = [&](const std::string &key) -> const std::string * {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  const auto num = [&](const std::string &key, double &dst) {
    if (const std::string *v = get(key))
      dst = parse_number<double>(key, *v);
  };
  const auto count = [&](const std::string &key, auto &dst) {
    if (const std::string *v = get(key))
      dst = parse_number<std::remove_reference_t<decltype(dst)>>(key, *v);
  };

  const std::string *kind = get("experiment.kind");
  if (!kind)
    throw ConfigError("experiment.kind",
                      "is required; every config needs experiment.kind and "
                      "experiment.H_a (experiment.H_lo and experiment.H_hi "
                      "for critical-fields)");
  const auto k = parse_kind(*kind);
  if (!k)
    throw ConfigError("experiment.kind", "unknown experiment kind '" + *kind + "'");
  c.kind = *k;

  count("stack.n_hard", c.stack.n_hard);
  count("stack.n_soft", c.stack.n_soft);
  num("stack.d", c.stack.d);
  num("stack.hard_A", c.stack.hard.A);
  num("stack.hard_K", c.stack.hard.K);
  num("stack.hard_M", c.stack.hard.M);
  num("stack.soft_A", c.stack.soft.A);
  num("stack.soft_K", c.stack.soft.K);
  num("stack.soft_M", c.stack.soft.M);
  num("stack.interface_A", c.stack.interface_A);

  num("dynamics.g", c.step.g);
  count("dynamics.steps_per_period", c.step.steps_per_period);
  num("dynamics.dt_max", c.step.dt_max);
  num("dynamics.stiffness_fraction", c.step.stiffness_fraction);

  num("relax.torque_tol", c.relax.torque_tol);
  num("relax.H_floor", c.relax.H_floor);
  count("relax.max_steps", c.relax.max_steps);

  if (c.kind == ExperimentKind::critical_fields) {
    // coarser defaults: every sample is a full turn
    c.coarse_step = 2.0;
    c.refine_step = 0.2;
  }
  const bool needs_H = c.kind != ExperimentKind::critical_fields;
  if (needs_H && !entries.count("experiment.H_a"))
    throw ConfigError("experiment.H_a", "is required for kind " + *kind +
                                            " (required keys: experiment.kind, "
                                            "experiment.H_a)");
  num("experiment.H_a", c.H_a);
  num("experiment.theta_a", c.theta_a);
  if (const std::string *v = get("experiment.initial"))
    c.initial = *v;
  if (const std::string *v = get("experiment.snapshot_in"))
    c.snapshot_in = *v;
  count("experiment.seed", c.seed);
  num("experiment.theta_start", c.theta_start);
  num("experiment.theta_end", c.theta_end);
  num("experiment.coarse_step", c.coarse_step);
  num("experiment.refine_step", c.refine_step);
  if (const std::string *v = get("experiment.direction")) {
    if (*v == "increasing")
      c.directions = Directions::increasing;
    else if (*v == "decreasing")
      c.directions = Directions::decreasing;
    else if (*v == "both")
      c.directions = Directions::both;
    else
      throw ConfigError("experiment.direction",
                        "must be increasing, decreasing or both");
  }
  num("experiment.bracket_lo", c.bracket_lo);
  num("experiment.bracket_hi", c.bracket_hi);
  num("experiment.tol", c.tol);
  if (!needs_H) {
    for (const char *key : {"experiment.H_lo", "experiment.H_hi"})
      if (!entries.count(key))
        throw ConfigError(key, "is required for kind critical-fields");
  }
  num("experiment.H_lo", c.H_lo);
  num("experiment.H_hi", c.H_hi);
  num("experiment.H_tol", c.H_tol);
  count("experiment.samples", c.samples);
  num("experiment.width_drop", c.width_drop);
  num("experiment.hard_angle", c.hard_angle);

  // range checks, reported with config key names
  using detail::require_positive;
  if (c.stack.n_hard < 1)
    throw ConfigError("stack.n_hard", "must be >= 1");
  if (c.stack.n_soft < 1)
    throw ConfigError("stack.n_soft", "must be >= 1");
  require_positive("stack.d", c.stack.d);
  require_positive("stack.hard_A", c.stack.hard.A);
  require_positive("stack.hard_M", c.stack.hard.M);
  require_positive("stack.soft_A", c.stack.soft.A);
  require_positive("stack.soft_M", c.stack.soft.M);
  require_positive("stack.interface_A", c.stack.interface_A);
  if (!(c.stack.hard.K >= 0.0))
    throw ConfigError("stack.hard_K", "must be >= 0");
  if (!(c.stack.soft.K >= 0.0))
    throw ConfigError("stack.soft_K", "must be >= 0");
  // the library errors carry the bare field name; re-key them
  const auto rekey = [](const std::string &section, const ValidationError &e) {
    const std::string what = e.what();
    return ConfigError(section + "." + e.field(),
                       what.substr(std::min(what.size(), e.field().size() + 2)));
  };
  try {
    c.step.validate();
  } catch (const ValidationError &e) {
    throw rekey("dynamics", e);
  }
  try {
    c.relax.validate();
  } catch (const ValidationError &e) {
    throw rekey("relax", e);
  }
  if (!(c.H_a >= 0.0))
    throw ConfigError("experiment.H_a", "must be >= 0");
  if (c.initial != "saturated" && c.initial != "random" && c.initial != "snapshot")
    throw ConfigError("experiment.initial", "must be saturated, random or snapshot");
  if (c.initial == "snapshot" && c.snapshot_in.empty())
    throw ConfigError("experiment.snapshot_in", "is required when initial = snapshot");
  require_positive("experiment.coarse_step", c.coarse_step);
  require_positive("experiment.refine_step", c.refine_step);
  if (c.refine_step > c.coarse_step)
    throw ConfigError("experiment.refine_step", "must be <= coarse_step");
  if (!(c.theta_end > c.theta_start))
    throw ConfigError("experiment.theta_end", "must be > theta_start");
  if (c.bracket_lo == c.bracket_hi)
    throw ConfigError("experiment.bracket_hi", "must differ from bracket_lo");
  require_positive("experiment.tol", c.tol);
  if (!needs_H) {
    if (!(c.H_lo >= 0.0))
      throw ConfigError("experiment.H_lo", "must be >= 0");
    if (!(c.H_hi > c.H_lo))
      throw ConfigError("experiment.H_hi", "must be > H_lo");
    require_positive("experiment.H_tol", c.H_tol);
    if (c.samples < 2)
      throw ConfigError("experiment.samples", "must be >= 2");
  }
  require_positive("experiment.width_drop", c.width_drop);
  require_positive("experiment.hard_angle", c.hard_angle);
  return c;
}

/// Parses INI text, applies `overrides` ("section.key=value") and validates.
inline ExperimentConfig parse_config(const std::string &text,
                                     const std::vector<std::string> &overrides = {}) {
  detail::Entries entries = detail::read_entries(text);
  for (const std::string &o : overrides)
    apply_override(entries, o);
  return build_config(entries);
}

/// Canonical INI text of the effective config, every value spelled out.
/// Parsing it back yields the same config.
inline std::string to_ini(const ExperimentConfig &c) {
  using detail::format_double;
  std::ostringstream o;
  o << "[stack]\n"
    << "n_hard = " << c.stack.n_hard << "\n"
    << "n_soft = " << c.stack.n_soft << "\n"
    << "d = " << format_double(c.stack.d) << "\n"
    << "hard_A = " << format_double(c.stack.hard.A) << "\n"
    << "hard_K = " << format_double(c.stack.hard.K) << "\n"
    << "hard_M = " << format_double(c.stack.hard.M) << "\n"
    << "soft_A = " << format_double(c.stack.soft.A) << "\n"
    << "soft_K = " << format_double(c.stack.soft.K) << "\n"
    << "soft_M = " << format_double(c.stack.soft.M) << "\n"
    << "interface_A = " << format_double(c.stack.interface_A) << "\n"
    << "[dynamics]\n"
    << "g = " << format_double(c.step.g) << "\n"
    << "steps_per_period = " << c.step.steps_per_period << "\n"
    << "dt_max = " << format_double(c.step.dt_max) << "\n"
    << "stiffness_fraction = " << format_double(c.step.stiffness_fraction) << "\n"
    << "[relax]\n"
    << "torque_tol = " << format_double(c.relax.torque_tol) << "\n"
    << "H_floor = " << format_double(c.relax.H_floor) << "\n"
    << "max_steps = " << c.relax.max_steps << "\n"
    << "[experiment]\n"
    << "kind = " << to_string(c.kind) << "\n";
  switch (c.kind) {
  case ExperimentKind::relax:
    o << "H_a = " << format_double(c.H_a) << "\n"
      << "theta_a = " << format_double(c.theta_a) << "\n"
      << "initial = " << c.initial << "\n";
    if (c.initial == "random")
      o << "seed = " << c.seed << "\n";
    if (c.initial == "snapshot")
      o << "snapshot_in = " << c.snapshot_in << "\n";
    break;
  case ExperimentKind::sweep:
  case ExperimentKind::torque_curve:
  case ExperimentKind::angle_curve:
    o << "H_a = " << format_double(c.H_a) << "\n"
      << "theta_start = " << format_double(c.theta_start) << "\n"
      << "theta_end = " << format_double(c.theta_end) << "\n"
      << "coarse_step = " << format_double(c.coarse_step) << "\n"
      << "refine_step = " << format_double(c.refine_step) << "\n"
      << "direction = "
      << (c.directions == Directions::increasing   ? "increasing"
          : c.directions == Directions::decreasing ? "decreasing"
                                                   : "both")
      << "\n";
    break;
  case ExperimentKind::critical_angle:
    o << "H_a = " << format_double(c.H_a) << "\n"
      << "bracket_lo = " << format_double(c.bracket_lo) << "\n"
      << "bracket_hi = " << format_double(c.bracket_hi) << "\n"
      << "coarse_step = " << format_double(c.coarse_step) << "\n"
      << "tol = " << format_double(c.tol) << "\n";
    break;
  case ExperimentKind::critical_fields:
    o << "H_lo = " << format_double(c.H_lo) << "\n"
      << "H_hi = " << format_double(c.H_hi) << "\n"
      << "H_tol = " << format_double(c.H_tol) << "\n"
      << "samples = " << c.samples << "\n"
      << "coarse_step = " << format_double(c.coarse_step) << "\n"
      << "refine_step = " << format_double(c.refine_step) << "\n"
      << "width_drop = " << format_double(c.width_drop) << "\n"
      << "hard_angle = " << format_double(c.hard_angle) << "\n";
    break;
  }
  return o.str();
}

/// 64-bit FNV-1a of the canonical config text.
inline std::uint64_t fingerprint(const ExperimentConfig &c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_ini(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fingerprint_hex(const ExperimentConfig &c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fingerprint(c)));
  return buf;
}

} // namespace springmag::cli
