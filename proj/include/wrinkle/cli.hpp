#pragma once

/// \file cli.hpp
/// Argument handling and exit codes of the `wrinkle` executable:
///   0 every pass flag true, 1 some pass flag false,
///   2 configuration error (nothing written), 3 numerical failure (diagnostic.log only).

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wrinkle/commands.hpp"

namespace wrinkle {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFlagFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"wrinkled Koiter shell toolkit"};
  std::string config_path, out_dir, command, seed_text;
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--command", command, "command to run (overrides [run] command)");
  app.add_option("--seed", seed_text, "u64 seed for randomized batteries (overrides [run] seed)");
  std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!command.empty()) cfg.command = command;
    if (!seed_text.empty()) cfg.seed = parse_seed(seed_text);
    if (cfg.command.empty()) throw ConfigError("no command given (--command or [run] command)");
    validate(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const std::filesystem::path dir(out_dir);
  CommandOutput result;
  try {
    result = execute(cfg, cfg.command);
  } catch (const Error& e) {
    std::filesystem::create_directories(dir);
    write_file(dir / "diagnostic.log", "module=" + e.module() + "\nkind=" + e.kind() + "\ncommand=" + cfg.command +
                                           "\nmessage=" + e.what() + '\n');
    err << "numerical failure in module " << e.module() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : result.files) write_file(dir / name, content);
  write_file(dir / "summary.txt", render_summary(cfg, cfg.command, result));
  for (const auto& [k, v] : result.flags)
    if (!v) err << "pass flag false: " << k << '\n';
  return result.pass() ? kExitOk : kExitFlagFailed;
}

}  // namespace wrinkle
