#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "hypdiss/error.hpp"

namespace fs = std::filesystem;
using hypdiss::cli::RunConfig;

namespace {

std::string binary() {
  const char* b = std::getenv("HYPDISS_BIN");
  REQUIRE_MESSAGE(b != nullptr, "HYPDISS_BIN is not set");
  return b;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hypdiss_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const fs::path& out) {
  fs::create_directories(out);
  const std::string cmd = binary() + " " + args + " --output-dir " + out.string() + " > " +
                          (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing " << p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json json_file(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string data(const std::string& name) { return std::string(HYPDISS_TEST_DATA) + "/" + name; }

}  // namespace

TEST_CASE("exit codes follow the overall verdict") {
  const fs::path out = scratch("verdicts");
  CHECK(run("check --builtin damped-wave", out / "pass") == 0);
  CHECK(json_file(out / "pass/check/summary.json")["overall"] == "pass");
  CHECK(run("check --builtin convected-damped-wave --a 1.5", out / "fail") == 2);
  CHECK(json_file(out / "fail/check/summary.json")["verdicts"]["D1"] == "fail");
  CHECK(run("check --builtin convected-damped-wave --a 1", out / "marginal") == 3);
  CHECK(json_file(out / "marginal/check/summary.json")["overall"] == "marginal");

  for (const char* name : {"HA", "HB", "D1", "D2", "D3", "UNIFORM"}) {
    CHECK(fs::exists(out / "pass/check" / (std::string(name) + ".json")));
    CHECK(fs::exists(out / "pass/check" / (std::string(name) + "_margins.csv")));
  }
}

TEST_CASE("errors exit with 1") {
  const fs::path out = scratch("errors");
  CHECK(run("check --builtin no-such-model", out / "a") == 1);
  CHECK(json_file(out / "a/error.json")["error"]["kind"] == "ConfigError");
  CHECK(run("check --model " + data("missing.json"), out / "b") == 1);
  CHECK(run("check --no-such-flag 1", out / "c") == 1);
  CHECK(run("check --config " + data("unknown_key.json"), out / "d") == 1);
  CHECK(run("check --a not-a-number", out / "e") == 1);
  CHECK(run("dispersion --builtin damped-wave --d 1 --direction-index 5", out / "f") == 1);
}

TEST_CASE("configuration precedence") {
  SUBCASE("library resolution") {
    const RunConfig defaults = hypdiss::cli::resolve_config(nullptr, nlohmann::json::object());
    CHECK(defaults.builtin == "damped-wave");
    CHECK(defaults.a == 2.0);
    const nlohmann::json file = {{"a", 1.5}, {"xi_count", 25}};
    const RunConfig from_file = hypdiss::cli::resolve_config(file, nlohmann::json::object());
    CHECK(from_file.a == 1.5);
    CHECK(from_file.xi_count == 25);
    const RunConfig both = hypdiss::cli::resolve_config(file, {{"a", 0.5}});
    CHECK(both.a == 0.5);
    CHECK(both.xi_count == 25);
    CHECK_THROWS_AS((void)hypdiss::cli::resolve_config({{"xi_count", "many"}}, nlohmann::json::object()),
                    hypdiss::Error);
    CHECK(hypdiss::cli::flag_name("uniform_xi_min") == "--uniform-xi-min");
    CHECK(hypdiss::cli::parse_flag_value("", true) == true);
    CHECK(hypdiss::cli::parse_flag_value("7", 1) == 7);
    CHECK_THROWS_AS((void)hypdiss::cli::parse_flag_value("7.5", 1), hypdiss::Error);
  }

  SUBCASE("binary") {
    const fs::path out = scratch("precedence");
    CHECK(run("check --config " + data("convected_fail.json"), out / "file") == 2);
    const nlohmann::json cfg = json_file(out / "file/check/summary.json")["config"];
    CHECK(cfg["a"] == 1.5);
    CHECK(cfg["xi_count"] == 25);
    CHECK(cfg["uniform_xi_count"] == RunConfig{}.uniform_xi_count);
    CHECK(run("check --config " + data("convected_fail.json") + " --a 0.5", out / "flag") == 0);
    CHECK(json_file(out / "flag/check/summary.json")["config"]["a"] == 0.5);
  }
}

TEST_CASE("model files") {
  const fs::path out = scratch("model_file");
  const int code = run("check --model " + data("poly_model.json"), out);
  CHECK((code == 0 || code == 2 || code == 3));
  CHECK(json_file(out / "check/summary.json")["model"].is_string());
}

TEST_CASE("repeated runs are byte-identical") {
  // Artifacts record the output directory, so both runs write to the same place.
  const fs::path out = scratch("determinism");
  const fs::path work = out / "work";
  auto run_both = [&] {
    fs::remove_all(work);
    REQUIRE(run("check --builtin fluid --seed 3", work) == 0);
    REQUIRE(run("decay --builtin damped-wave --seed 3", work) == 0);
  };
  run_both();
  fs::copy(work, out / "first", fs::copy_options::recursive);
  run_both();
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(out / "first")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), out / "first");
    CHECK_MESSAGE(slurp(entry.path()) == slurp(work / rel), rel.string());
    ++compared;
  }
  CHECK(compared >= 15);
}

TEST_CASE("dispersion curves for the damped wave") {
  const fs::path out = scratch("dispersion");
  REQUIRE(run("dispersion --builtin damped-wave --d 1 --xi-min 0.1 --xi-max 10 --xi-count 21", out) == 0);
  std::istringstream csv(slurp(out / "dispersion/roots.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "xi,re_0,im_0,re_1,im_1");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<double> v;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 5);
    const double xi = v[0];
    // Roots of l^2 + 2 l + xi^2: -1 +- sqrt(1 - xi^2).
    if (xi < 1.0) {
      const double s = std::sqrt(1.0 - xi * xi);
      CHECK(v[1] == doctest::Approx(-1.0 - s).epsilon(1e-8));
      CHECK(v[3] == doctest::Approx(-1.0 + s).scale(1.0).epsilon(1e-8));
    } else {
      CHECK(v[1] == doctest::Approx(-1.0).epsilon(1e-6));
      CHECK(v[3] == doctest::Approx(-1.0).epsilon(1e-6));
      CHECK(std::abs(v[2]) == doctest::Approx(std::sqrt(xi * xi - 1.0)).epsilon(1e-5));
    }
    ++rows;
  }
  CHECK(rows == 21);
}

TEST_CASE("decay, simulate, paradiff-test and report") {
  const fs::path out = scratch("pipeline");
  CHECK(run("decay --self-test", out) == 0);
  CHECK(json_file(out / "decay/fit.json")["self_test"]["pass"] == true);
  CHECK(run("decay --builtin damped-wave", out) == 0);
  const nlohmann::json fit = json_file(out / "decay/fit.json")["fit"];
  CHECK(fit["exponent"].get<double>() == doctest::Approx(-0.75).epsilon(0.1 / 0.75));

  CHECK(run("simulate --builtin convected-damped-wave --a 0.5 --kappa 1 --d 1 --t-final 2 --energy", out) == 0);
  const nlohmann::json sim = json_file(out / "simulate/summary.json");
  CHECK(sim["status"] == "completed");
  CHECK(sim["energy_inequality_holds"] == true);
  CHECK(fs::exists(out / "simulate/trace.csv"));
  CHECK(fs::exists(out / "simulate/checkpoint.bin"));

  CHECK(run("paradiff-test", out) == 0);
  const nlohmann::json pd = json_file(out / "paradiff/report.json");
  CHECK(pd["all_pass"] == true);
  CHECK(pd["checks"].size() >= 5);

  CHECK(run("check --builtin damped-wave", out) == 0);
  CHECK(run("report", out) == 0);
  CHECK(fs::exists(out / "report/report.md"));
  const nlohmann::json report = json_file(out / "report/report.json");
  CHECK(report.is_object());
}
