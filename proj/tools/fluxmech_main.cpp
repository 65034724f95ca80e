// fluxmech command line: one subcommand per scenario, flat key=value configs.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluxmech/config.hpp"
#include "fluxmech/scenarios.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw fluxmech::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::vector<fluxmech::ConfigEntry> entries_from_sets(const std::vector<std::string>& sets) {
  std::string joined;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw fluxmech::ConfigError("--set expects key=value, got '" + s + "'");
    }
    joined += s.substr(0, eq) + " = " + s.substr(eq + 1) + "\n";
  }
  return fluxmech::parse_config_text(joined);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluxonium-mechanical hybrid simulator"};
  app.require_subcommand(0, 1);

  auto* list_cmd = app.add_subcommand("list", "list available scenarios");

  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir;
  int threads = 1;

  std::vector<CLI::App*> scenario_cmds;
  for (const auto& spec : fluxmech::catalog()) {
    auto* cmd = app.add_subcommand(spec.name, spec.description + " [" + spec.figure + "]");
    cmd->add_option("--config", config_file, "flat key = value config file");
    cmd->add_option("--set", sets, "override a single key, key=value")->take_all();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    scenario_cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (list_cmd->parsed()) {
    std::printf("%-20s %-16s %s\n", "scenario", "figure", "description");
    for (const auto& spec : fluxmech::catalog()) {
      std::printf("%-20s %-16s %s\n", spec.name.c_str(), spec.figure.c_str(),
                  spec.description.c_str());
    }
    return 0;
  }

  const CLI::App* chosen = nullptr;
  for (const auto* cmd : scenario_cmds) {
    if (cmd->parsed()) chosen = cmd;
  }
  if (!chosen) {
    std::cout << app.help();
    return 0;
  }

  try {
    std::vector<fluxmech::ConfigEntry> entries;
    if (!config_file.empty()) entries = fluxmech::parse_config_text(read_file(config_file));
    const auto overrides = entries_from_sets(sets);
    entries.insert(entries.end(), overrides.begin(), overrides.end());

    const fluxmech::ResolvedConfig cfg =
        fluxmech::resolve_scenario_config(chosen->get_name(), entries);

    std::filesystem::path out;
    if (!out_dir.empty()) {
      out = out_dir;
    } else {
      const char* env_root = std::getenv("FLUXMECH_OUT_DIR");
      out = std::filesystem::path(env_root ? env_root : "out") / cfg.scenario;
    }

    const fluxmech::ScenarioResult result = fluxmech::run_scenario(cfg, out, threads);
    std::printf("%s: wrote %zu files to %s (config %s)\n", cfg.scenario.c_str(),
                result.outputs.size() + 1, result.out_dir.string().c_str(),
                fluxmech::config_hash(cfg).c_str());
    return 0;
  } catch (const fluxmech::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
