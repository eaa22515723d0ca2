// springmag: run spring-magnet experiments from an INI config.
//
//   springmag sweep --config run.ini --out results/ --override experiment.H_a=6797
//
// Exit codes: 0 success, 1 search found nothing, 2 some relaxation hit
// max_steps, 64 usage or config error, 74 I/O error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "springmag/cli/config.hpp"
#include "springmag/cli/io.hpp"
#include "springmag/cli/run.hpp"

namespace sc = springmag::cli;

namespace {

struct Invocation {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  bool trace = false;
};

void add_common(CLI::App *sub, Invocation &inv) {
  sub->add_option("--config", inv.config_path, "INI config, or a result file whose header holds one")
      ->required();
  sub->add_option("--out", inv.out_dir, "output directory (created if missing)");
  sub->add_option("--override,--param", inv.overrides,
                  "section.key=value, applied after the config file")
      ->take_all()
      ->allow_extra_args(false);
  sub->add_flag("--trace", inv.trace, "write per-step convergence traces");
}

int execute(const std::string &subcommand, const Invocation &inv) {
  std::string text = sc::read_file(inv.config_path);
  if (text.rfind("# springmag", 0) == 0) {
    const auto ini = sc::config_from_header(text);
    if (!ini)
      throw sc::ConfigError("config", inv.config_path + " has no config block");
    text = *ini;
  }
  auto entries = sc::detail::read_entries(text);
  for (const std::string &o : inv.overrides)
    sc::apply_override(entries, o);
  if (subcommand != "run") {
    const auto it = entries.find("experiment.kind");
    if (it == entries.end())
      entries["experiment.kind"] = subcommand;
    else if (it->second != subcommand)
      throw sc::ConfigError("experiment.kind", "is '" + it->second +
                                                   "' but the subcommand is '" +
                                                   subcommand + "'");
  }
  const sc::ExperimentConfig config = sc::build_config(entries);
  return sc::run(config, {inv.out_dir, inv.trace}, std::cout);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Spin-chain simulator for exchange-spring bilayers"};
  app.require_subcommand(1);
  Invocation inv;
  std::vector<std::pair<CLI::App *, std::string>> subs;
  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"run", "run the experiment named by experiment.kind"},
      {"relax", "relax one state in a fixed field"},
      {"sweep", "rotate the field direction through a full turn"},
      {"critical-angle", "locate the chirality flip angle"},
      {"critical-fields", "bracket H_c1, H_c2 and H_c3"},
      {"torque-curve", "torque density over a rotational sweep"},
      {"angle-curve", "magnetization angle over a rotational sweep"}};
  for (const auto &[name, help] : kinds) {
    CLI::App *sub = app.add_subcommand(name, help);
    add_common(sub, inv);
    subs.emplace_back(sub, name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sc::exit_usage;
  }

  std::string chosen;
  for (const auto &[sub, name] : subs)
    if (sub->parsed())
      chosen = name;

  try {
    return execute(chosen, inv);
  } catch (const sc::IoError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return sc::exit_io;
  } catch (const springmag::ValidationError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return sc::exit_usage;
  } catch (const springmag::NotFound &e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 70;
  }
}
