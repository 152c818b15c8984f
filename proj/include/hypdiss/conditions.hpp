#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hypdiss/eigstructure.hpp"
#include "hypdiss/grids.hpp"
#include "hypdiss/model.hpp"

namespace hypdiss {

enum class Verdict { Pass, Fail, Marginal };
enum class Condition { HA, HB, D1, D2, D3, Uniform };

[[nodiscard]] std::string_view to_string(Verdict v) noexcept;
[[nodiscard]] std::string_view to_string(Condition c) noexcept;

// Pass iff margin < -floor, fail iff margin > floor, marginal otherwise.
[[nodiscard]] Verdict classify_margin(double margin, double floor);

struct Witness {
  RVec u;
  RVec omega;
  double xi = 0.0;
};

struct GridMargin {
  double xi = 0.0;
  int omega_index = 0;
  double margin = 0.0;
};

struct ConditionReport {
  Condition condition = Condition::HA;
  Verdict verdict = Verdict::Fail;
  double margin = 0.0;
  double c_bar = 0.0;
  Witness witness;
  std::string grid_spec;
  std::vector<GridMargin> points;
  nlohmann::json trace = nlohmann::json::object();
};

struct CheckSettings {
  double strictness_floor = 1e-10;
  double cluster_tolerance = kDefaultClusterTolerance;
  int state_samples = kDefaultStateSamples;
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int xi_count = 49;
  double uniform_xi_min = 1e-2;
  double uniform_xi_max = 1e2;
  int uniform_xi_count = 49;
  double lyapunov_cond_ceiling = 1e8;
};

// Symmetrizers produced by the hyperbolicity checks, keyed by exact (u, omega).
class SymmetrizerCache {
 public:
  void insert(const RVec& u, const RVec& omega, CMat s);
  [[nodiscard]] const CMat* find(const RVec& u, const RVec& omega) const;
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

 private:
  struct Entry {
    RVec u;
    RVec omega;
    CMat s;
  };
  std::vector<Entry> entries_;
};

// The model must be normalized for every checker.
[[nodiscard]] ConditionReport check_HA(const CoefficientModel& model, const std::vector<RVec>& states,
                                       const DirectionSet& directions, SymmetrizerCache& cache,
                                       const CheckSettings& settings = {});
[[nodiscard]] ConditionReport check_HB(const CoefficientModel& model, const std::vector<RVec>& states,
                                       const DirectionSet& directions, SymmetrizerCache& cache,
                                       const CheckSettings& settings = {});
[[nodiscard]] ConditionReport check_D1(const CoefficientModel& model, const RVec& ubar, const DirectionSet& directions,
                                       const SymmetrizerCache& ha_cache, const CheckSettings& settings = {});
[[nodiscard]] ConditionReport check_D2(const CoefficientModel& model, const RVec& ubar, const DirectionSet& directions,
                                       const SymmetrizerCache& hb_cache, const CheckSettings& settings = {});
[[nodiscard]] ConditionReport check_D3(const CoefficientModel& model, const RVec& ubar, const DirectionSet& directions,
                                       const std::vector<double>& xi_grid, const CheckSettings& settings = {});
[[nodiscard]] ConditionReport check_uniform_dissipativity(const CoefficientModel& model, const RVec& ubar,
                                                          const DirectionSet& directions,
                                                          const std::vector<double>& xi_grid,
                                                          const CheckSettings& settings = {});

// Per-point quantities behind the uniform certificate.
struct UniformPoint {
  double abscissa = 0.0;        // max Re spec M
  double ratio = 0.0;           // -abscissa / rho
  double cond_literal = 0.0;    // cond P for P M + M^* P = -rho I
  double cond_balanced = 0.0;   // cond of the rate-balanced certificate
  double certified_ratio = 0.0; // certified decay rate of the balanced P divided by rho
};
[[nodiscard]] UniformPoint uniform_point(const CoefficientModel& model, const RVec& u, const RVec& xi_vec);

struct DissipationSymbol {
  CMat D;
  double c_inf = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double residual = 0.0;  // || D M + M^* D + I ||
};

// Lyapunov solution of D M + M^* D = -I at |xi| >= r_threshold; c_inf = min(1, lambda_min(D)).
[[nodiscard]] DissipationSymbol build_dissipation_symbol(const CoefficientModel& model, const RVec& u,
                                                         const RVec& xi_vec, double r_threshold = 1.0);

// max over the first-order xi-derivatives of <xi> |d_xi D| by central differences.
[[nodiscard]] double dissipation_derivative_bound(const CoefficientModel& model, const RVec& u, const RVec& xi_vec,
                                                  double h = 1e-5);

struct FullCheck {
  std::vector<ConditionReport> reports;
  Verdict overall = Verdict::Pass;
};

// HA, HB, D1, D2, D3, uniform in dependency order. Dependent checks are reported
// as failures when their prerequisites fail, and as marginal when those are marginal.
[[nodiscard]] FullCheck run_all_checks(const CoefficientModel& model, const CheckSettings& settings,
                                       const DirectionSet& directions);

[[nodiscard]] nlohmann::json to_json(const ConditionReport& report);
// CSV with columns xi, omega_index, margin.
[[nodiscard]] std::string margins_csv(const ConditionReport& report);

}  // namespace hypdiss
