#include "config.hpp"

#include <algorithm>
#include <cstdlib>

#include "hypdiss/error.hpp"
#include "hypdiss/model_json.hpp"

namespace hypdiss::cli {

namespace {

bool same_kind(const nlohmann::json& value, const nlohmann::json& like) {
  if (like.is_number_float()) return value.is_number();
  if (like.is_number_integer()) return value.is_number_integer();
  if (like.is_boolean()) return value.is_boolean();
  if (like.is_string()) return value.is_string();
  return false;
}

void apply_layer(nlohmann::json& target, const nlohmann::json& layer, const char* origin) {
  if (layer.is_null()) return;
  if (!layer.is_object()) fail(ErrorKind::ConfigError, std::string(origin) + " must be a JSON object");
  for (const auto& [key, value] : layer.items()) {
    if (!target.contains(key)) fail(ErrorKind::ConfigError, std::string("unknown key '") + key + "' in " + origin);
    if (!same_kind(value, target[key])) fail(ErrorKind::ConfigError, "key '" + key + "' has the wrong type in " + origin);
    target[key] = value;
  }
}

}  // namespace

RunConfig resolve_config(const nlohmann::json& file_doc, const nlohmann::json& overrides) {
  nlohmann::json merged = RunConfig{};
  apply_layer(merged, file_doc, "config file");
  apply_layer(merged, overrides, "command line");
  return merged.get<RunConfig>();
}

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

nlohmann::json parse_flag_value(const std::string& text, const nlohmann::json& like) {
  auto bad = [&]() -> nlohmann::json { fail(ErrorKind::ConfigError, "cannot parse flag value '" + text + "'"); };
  if (like.is_string()) return text;
  if (like.is_boolean()) {
    if (text.empty() || text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    return bad();
  }
  char* end = nullptr;
  if (like.is_number_integer()) {
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0') return bad();
    return static_cast<int>(v);
  }
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') return bad();
  return v;
}

CoefficientModel build_model(const RunConfig& c) {
  CoefficientModel model = [&] {
    if (!c.model_file.empty()) return load_model_file(c.model_file);
    if (c.builtin == "damped-wave") return builtin_damped_wave(c.a, c.d);
    if (c.builtin == "convected-damped-wave") return builtin_convected_damped_wave(c.a, c.kappa);
    if (c.builtin == "fluid") return builtin_barotropic_fluid(FluidParameters{c.r, c.mu, c.nu, c.eta, c.zeta});
    fail(ErrorKind::ConfigError, "unknown builtin model '" + c.builtin + "'");
  }();
  return model.normalized() ? model : normalize_b00(model);
}

}  // namespace hypdiss::cli
