#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hypdiss/model.hpp"

namespace hypdiss::cli {

// Everything a command reads. Keys in JSON configs and flag names (dashes for
// underscores) follow the field names.
struct RunConfig {
  std::string command = "check";

  // model
  std::string builtin = "damped-wave";
  std::string model_file;
  double a = 2.0;
  int d = 3;
  double kappa = 0.0;
  double r = 3.0;
  double mu = 2.0;
  double nu = 1.0;
  double eta = 1.0;
  double zeta = 0.0;

  // check / dispersion grids and tolerances
  double floor = 1e-10;
  double cluster_tol = 1e-7;
  int state_samples = 256;
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int xi_count = 49;
  double uniform_xi_min = 1e-2;
  double uniform_xi_max = 1e2;
  int uniform_xi_count = 49;
  double cond_ceiling = 1e8;
  int direction_index = 0;

  // decay
  double s = 3.0;
  double t_min = 5.0;
  double t_max = 200.0;
  int time_samples = 24;
  double band = 0.1;
  double width = 0.0;  // 0: automatic (decay) or 0.5 (simulate)
  bool self_test = false;

  // simulate
  int N = 32;
  double L = 6.283185307179586;
  double epsilon = 1e-2;
  double t_final = 1.0;
  double dt = 0.0;
  double cfl = 2.5;
  bool frozen = false;
  bool energy = false;
  int records = 100;
  double energy_s = 1.0;
  double energy_kappa = 50.0;

  // paradiff
  double eps1 = 0.25;
  double eps2 = 0.5;
  int smooth_order = 3;

  std::string output_dir = "out";
  int seed = 1;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, command, builtin, model_file, a, d, kappa, r, mu, nu, eta,
                                                zeta, floor, cluster_tol, state_samples, xi_min, xi_max, xi_count,
                                                uniform_xi_min, uniform_xi_max, uniform_xi_count, cond_ceiling,
                                                direction_index, s, t_min, t_max, time_samples, band, width,
                                                self_test, N, L, epsilon, t_final, dt, cfl, frozen, energy, records,
                                                energy_s, energy_kappa, eps1, eps2, smooth_order, output_dir, seed)


// Defaults, then `file_doc` (if not null), then `overrides`. Throws ConfigError on
// unknown keys or wrongly typed values.
[[nodiscard]] RunConfig resolve_config(const nlohmann::json& file_doc, const nlohmann::json& overrides);

// Flag name for a config key ("xi_min" -> "--xi-min").
[[nodiscard]] std::string flag_name(const std::string& key);

// Parses a flag string into the JSON type of `like`. Throws ConfigError.
[[nodiscard]] nlohmann::json parse_flag_value(const std::string& text, const nlohmann::json& like);

// Model named by the config, normalized so that B^{00} = -I.
[[nodiscard]] CoefficientModel build_model(const RunConfig& config);

}  // namespace hypdiss::cli
