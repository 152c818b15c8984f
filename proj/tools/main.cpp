#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "hypdiss/error.hpp"
#include "hypdiss/io.hpp"

namespace {

constexpr const char* kCommands[][2] = {
    {"check", "run the hyperbolicity and dissipativity checks"},
    {"dispersion", "write dispersion root curves along one direction"},
    {"decay", "linear spectral evolution and decay-rate fit"},
    {"simulate", "nonlinear pseudo-spectral simulation"},
    {"paradiff-test", "para-differential invariant suite"},
    {"report", "collect outputs into a summary"},
};

}  // namespace

int main(int argc, char** argv) {
  using hypdiss::cli::RunConfig;
  CLI::App app{"Numerical checks for second-order hyperbolic-dissipative systems"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags take precedence)");

  // One string-valued option per config key; parsed into the key's type afterwards.
  const nlohmann::json defaults = RunConfig{};
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> options;
  for (const auto& [key, value] : defaults.items()) {
    if (key == "command") continue;
    CLI::Option* opt = app.add_option(hypdiss::cli::flag_name(key), raw[key], "default: " + value.dump());
    if (value.is_boolean()) opt->expected(0, 1);
    options[key] = opt;
  }
  app.add_option("--model", raw["model_file"], "alias of --model-file");

  for (const auto& [name, help] : kCommands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hypdiss::cli::kExitError;
  }

  try {
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) overrides[key] = hypdiss::cli::parse_flag_value(raw[key], defaults[key]);
    }
    if (app.get_option("--model")->count() > 0) overrides["model_file"] = raw["model_file"];
    overrides["command"] = app.get_subcommands().front()->get_name();
    const nlohmann::json file_doc =
        config_path.empty() ? nlohmann::json(nullptr) : nlohmann::json::parse(hypdiss::read_file(config_path));
    const RunConfig config = hypdiss::cli::resolve_config(file_doc, overrides);
    return hypdiss::cli::run_command(config);
  } catch (const hypdiss::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config file is not valid JSON: " << e.what() << "\n";
  }
  return hypdiss::cli::kExitError;
}
