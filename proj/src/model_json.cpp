#include "hypdiss/model_json.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "hypdiss/error.hpp"

namespace hypdiss {

namespace {

using nlohmann::json;

struct Monomial {
  double coeff;
  std::vector<int> powers;
};

// Polynomial entry: constant when `terms` has a single monomial with all powers zero.
struct PolyMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<Monomial>> entries;  // row-major

  [[nodiscard]] RMat eval(const RVec& u) const {
    RMat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (const Monomial& t : entries[i * cols + j]) {
          double term = t.coeff;
          for (std::size_t k = 0; k < t.powers.size(); ++k) term *= std::pow(u(static_cast<Eigen::Index>(k)), t.powers[k]);
          acc += term;
        }
        m(i, j) = acc;
      }
    }
    return m;
  }

  [[nodiscard]] bool constant() const {
    for (const auto& e : entries) {
      for (const Monomial& t : e) {
        for (int p : t.powers) {
          if (p != 0) return false;
        }
      }
    }
    return true;
  }
};

[[noreturn]] void bad(const std::string& what) { fail(ErrorKind::ModelLoad, what); }

std::vector<Monomial> parse_entry(const json& e, int n) {
  if (e.is_number()) return {Monomial{e.get<double>(), std::vector<int>(n, 0)}};
  if (!e.is_array()) bad("matrix entry must be a number or a list of monomials");
  std::vector<Monomial> terms;
  for (const json& t : e) {
    if (!t.is_object() || !t.contains("c")) bad("monomial needs a coefficient \"c\"");
    Monomial m{t.at("c").get<double>(), std::vector<int>(n, 0)};
    if (t.contains("p")) {
      const auto p = t.at("p").get<std::vector<int>>();
      if (static_cast<int>(p.size()) != n) bad("monomial power list must have n entries");
      for (int x : p) {
        if (x < 0) bad("monomial powers must be nonnegative");
      }
      m.powers = p;
    }
    terms.push_back(std::move(m));
  }
  return terms;
}

PolyMatrix parse_matrix(const json& m, int n) {
  if (!m.is_array() || static_cast<int>(m.size()) != n) bad("coefficient matrix must have n rows");
  PolyMatrix pm{n, n, {}};
  for (const json& row : m) {
    if (!row.is_array() || static_cast<int>(row.size()) != n) bad("coefficient matrix must have n columns");
    for (const json& e : row) pm.entries.push_back(parse_entry(e, n));
  }
  return pm;
}

RVec parse_vector(const json& v, int n, const char* what) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) bad(std::string(what) + " must have n entries");
  RVec out(n);
  for (int i = 0; i < n; ++i) out(i) = v[i].get<double>();
  return out;
}

double param(const json& params, const char* key, double fallback) {
  if (params.contains(key)) return params.at(key).get<double>();
  return fallback;
}

CoefficientModel builtin_from_json(const json& spec) {
  const std::string name = spec.at("name").get<std::string>();
  const json params = spec.value("params", json::object());
  if (name == "damped-wave") {
    return builtin_damped_wave(param(params, "a", 2.0), static_cast<int>(param(params, "d", 1.0)));
  }
  if (name == "convected-damped-wave") {
    return builtin_convected_damped_wave(param(params, "a", 0.5), param(params, "kappa", 0.0));
  }
  if (name == "fluid") {
    FluidParameters p;
    p.r = param(params, "r", p.r);
    p.mu = param(params, "mu", p.mu);
    p.nu = param(params, "nu", p.nu);
    p.eta = param(params, "eta", p.eta);
    p.zeta = param(params, "zeta", p.zeta);
    return builtin_barotropic_fluid(p);
  }
  bad("unknown builtin model '" + name + "'");
}

}  // namespace

CoefficientModel model_from_json(const json& doc) {
  try {
    if (doc.contains("builtin")) return builtin_from_json(doc.at("builtin"));

    const int n = doc.at("n").get<int>();
    const int d = doc.at("d").get<int>();
    if (n <= 0 || d <= 0) bad("n and d must be positive");
    const RVec ref = doc.contains("reference_state") ? parse_vector(doc.at("reference_state"), n, "reference_state")
                                                     : RVec::Zero(n);
    StateBox box{ref.array() - 1.0, ref.array() + 1.0};
    if (doc.contains("state_domain")) {
      box.lo = parse_vector(doc.at("state_domain").at("lo"), n, "state_domain.lo");
      box.hi = parse_vector(doc.at("state_domain").at("hi"), n, "state_domain.hi");
    }

    bool all_constant = true;
    auto wrap = [&](PolyMatrix pm) -> MatrixFn {
      if (pm.constant()) {
        RMat c = pm.eval(RVec::Zero(n));
        return [c](const RVec&) { return c; };
      }
      all_constant = false;
      return [pm = std::move(pm)](const RVec& u) { return pm.eval(u); };
    };
    const RMat zero = RMat::Zero(n, n);
    std::vector<MatrixFn> a(d + 1, [zero](const RVec&) { return zero; });
    std::vector<MatrixFn> b((d + 1) * (d + 1), [zero](const RVec&) { return zero; });
    const RMat minus_identity = -RMat::Identity(n, n);
    b[0] = [minus_identity](const RVec&) { return minus_identity; };

    if (doc.contains("A")) {
      for (const auto& [key, value] : doc.at("A").items()) {
        const int j = std::stoi(key);
        if (j < 0 || j > d) bad("A index out of range: " + key);
        a[j] = wrap(parse_matrix(value, n));
      }
    }
    if (doc.contains("B")) {
      for (const auto& [key, value] : doc.at("B").items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) bad("B keys must look like \"j,k\"");
        const int j = std::stoi(key.substr(0, comma));
        const int k = std::stoi(key.substr(comma + 1));
        if (j < 0 || j > d || k < 0 || k > d) bad("B index out of range: " + key);
        b[j * (d + 1) + k] = wrap(parse_matrix(value, n));
      }
    }
    CoefficientModel model(n, d, ref, box, doc.value("label", std::string("custom")), a, b);
    model.mark_constant(all_constant);
    return model;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    bad(e.what());
  }
}

CoefficientModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ModelLoad, "cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  return model_from_json(doc);
}

}  // namespace hypdiss
