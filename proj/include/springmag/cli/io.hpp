#pragma once

// Plain-text result tables. Every file starts with a '#' block holding the
// fingerprint, the effective config, the column names and their units; data
// rows are comma separated with 17 significant digits.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "springmag/cli/config.hpp"
#include "springmag/model.hpp"
#include "springmag/record.hpp"
#include "springmag/sweep.hpp"

namespace springmag::cli {

/// Reading or writing `path` failed.
class IoError : public std::runtime_error {
public:
  IoError(const std::string &path, const std::string &what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

inline constexpr const char *config_begin = "# --- config ---";
inline constexpr const char *config_end = "# --- end config ---";

namespace detail {

inline std::string header(const ExperimentConfig &c, const std::string &title,
                          const std::string &columns, const std::string &units,
                          const std::vector<std::string> &extra = {}) {
  std::ostringstream o;
  o << "# springmag " << title << "\n"
    << "# fingerprint = " << fingerprint_hex(c) << "\n"
    << config_begin << "\n";
  std::istringstream ini(to_ini(c));
  for (std::string line; std::getline(ini, line);)
    o << "# " << line << "\n";
  o << config_end << "\n";
  for (const std::string &e : extra)
    o << "# " << e << "\n";
  o << "# columns: " << columns << "\n"
    << "# units: " << units << "\n";
  return o.str();
}

inline std::string csv(std::initializer_list<std::string> cells) {
  std::string row;
  for (const std::string &c : cells) {
    if (!row.empty())
      row += ',';
    row += c;
  }
  return row;
}

inline std::string num(double v) { return format_double(v); }

} // namespace detail

/// Extracts the INI text echoed between the config markers of an output
/// file, so any result file can serve as the config that reproduces it.
inline std::optional<std::string> config_from_header(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  bool inside = false;
  std::string out;
  while (std::getline(in, line)) {
    if (line == config_begin) {
      inside = true;
      continue;
    }
    if (line == config_end)
      return out;
    if (inside)
      out += (line.rfind("# ", 0) == 0 ? line.substr(2) : line) + "\n";
  }
  return std::nullopt;
}

inline void write_file(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw IoError(path, "cannot open for writing");
  f << content;
  f.close();
  if (!f)
    throw IoError(path, "write failed");
}

inline std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError(path, "cannot open for reading");
  std::ostringstream o;
  o << f.rdbuf();
  if (f.bad())
    throw IoError(path, "read failed");
  return o.str();
}

/// One row per layer: index, in-plane and out-of-plane angle.
inline std::string format_profile(const ExperimentConfig &c,
                                  const AngleProfile &p) {
  std::string out = detail::header(c, "profile", "layer,theta_deg,phi_deg",
                                   "1,deg,deg");
  for (std::size_t i = 0; i < p.size(); ++i)
    out += detail::csv({std::to_string(i + 1), detail::num(p.theta[i] / deg),
                        detail::num(p.phi[i] / deg)}) +
           "\n";
  return out;
}

/// One row per record; theta_i columns follow the fixed ones.
inline std::string format_sweep(const ExperimentConfig &c,
                                const std::vector<SweepRecord> &recs,
                                std::size_t layers,
                                const std::string &title = "sweep") {
  std::string columns =
      "theta_a_deg,torque,alpha_deg,chirality,equilibration_time,steps,converged";
  std::string units = "deg,erg/cm^2,deg,1,reduced,1,bool";
  for (std::size_t i = 1; i <= layers; ++i) {
    columns += ",theta_" + std::to_string(i) + "_deg";
    units += ",deg";
  }
  std::string out = detail::header(c, title, columns, units);
  for (const SweepRecord &r : recs) {
    if (r.profile.size() != layers)
      throw ValidationError("records", "profile length must equal the layer count");
    std::string row = detail::csv(
        {detail::num(r.theta_a / deg), detail::num(r.torque),
         detail::num(r.mag_angle / deg), std::to_string(r.chirality),
         detail::num(r.equilibration_time), std::to_string(r.steps),
         r.converged ? "1" : "0"});
    for (double t : r.profile.theta)
      row += "," + detail::num(t / deg);
    out += row + "\n";
  }
  return out;
}

/// Equilibrium spins with everything needed to continue from them.
struct Snapshot {
  std::string fingerprint;
  ExperimentConfig config;
  AppliedField applied;
  double residual = 0.0;
  ChainState state;
};

inline std::string format_snapshot(const Snapshot &s) {
  std::string out = detail::header(
      s.config, "snapshot", "layer,mx,my,mz", "1,1,1,1",
      {"H_a = " + detail::num(s.applied.magnitude),
       "theta_a_rad = " + detail::num(s.applied.angle),
       "residual = " + detail::num(s.residual),
       "time = " + detail::num(s.state.time)});
  for (std::size_t i = 0; i < s.state.size(); ++i) {
    const Spin &m = s.state.spins[i];
    out += detail::csv({std::to_string(i + 1), detail::num(m.x()),
                        detail::num(m.y()), detail::num(m.z())}) +
           "\n";
  }
  return out;
}

/// Inverse of format_snapshot. Values round-trip bit for bit.
inline Snapshot parse_snapshot(const std::string &text,
                               const std::string &origin = "snapshot") {
  const auto fail = [&](const std::string &what) -> IoError {
    return IoError(origin, "malformed snapshot: " + what);
  };
  const auto ini = config_from_header(text);
  if (!ini)
    throw fail("missing config block");
  Snapshot s;
  s.config = parse_config(*ini);
  std::istringstream in(text);
  std::optional<double> H, theta, res, time;
  std::string line;
  const auto value_of = [&](const std::string &l, const std::string &key)
      -> std::optional<double> {
    const std::string prefix = "# " + key + " = ";
    if (l.rfind(prefix, 0) != 0)
      return std::nullopt;
    return detail::parse_number<double>(key, l.substr(prefix.size()));
  };
  bool in_config = false;
  while (std::getline(in, line)) {
    if (line == config_begin || line == config_end) {
      in_config = line == config_begin;
      continue;
    }
    if (in_config)
      continue;
    if (line.rfind("# fingerprint = ", 0) == 0)
      s.fingerprint = line.substr(16);
    if (auto v = value_of(line, "H_a"))
      H = v;
    if (auto v = value_of(line, "theta_a_rad"))
      theta = v;
    if (auto v = value_of(line, "residual"))
      res = v;
    if (auto v = value_of(line, "time"))
      time = v;
    if (line.empty() || line[0] == '#')
      continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');)
      cells.push_back(cell);
    if (cells.size() != 4)
      throw fail("expected 4 columns in '" + line + "'");
    const Vec3 v{detail::parse_number<double>("mx", cells[1]),
                 detail::parse_number<double>("my", cells[2]),
                 detail::parse_number<double>("mz", cells[3])};
    s.state.spins.push_back(Spin::from_unit(v));
  }
  if (!H || !theta || !res || !time)
    throw fail("missing H_a, theta_a_rad, residual or time");
  if (s.fingerprint != fingerprint_hex(s.config))
    throw fail("fingerprint does not match the embedded config");
  if (s.state.size() != s.config.stack.n_hard + s.config.stack.n_soft)
    throw fail("layer count does not match the embedded config");
  s.applied = {*H, *theta};
  s.residual = *res;
  s.state.time = *time;
  return s;
}

} // namespace springmag::cli
