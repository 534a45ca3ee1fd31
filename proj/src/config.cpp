#include "hjlab/config.hpp"

#include "hjlab/hamiltonian.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace hjlab {

namespace {

using json = nlohmann::json;

std::string child(const std::string& base, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped += c;
  }
  return base + "/" + escaped;
}

void reject_unknown(const json& obj, const std::string& base, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(child(base, key), "unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const std::string& key, const std::string& base) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(child(base, key), "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& base) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(child(base, key), "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& base) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(child(base, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_number_array(const json& obj, const std::string& key, const std::string& base) {
  const json& v = obj.at(key);
  const std::string ptr = child(base, key);
  if (!v.is_array()) throw ConfigError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(ptr + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

const std::set<std::string>& datum_keys(const std::string& name) {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"sqrt-cusp", {"name", "id", "center", "amplitude"}},
      {"holder", {"name", "id", "center", "exponent", "amplitude"}},
      {"sawtooth", {"name", "id", "teeth", "amplitude"}},
      {"cosine", {"name", "id", "amplitude"}},
      {"random-nodal", {"name", "id", "knots", "amplitude", "seed"}},
      {"constant", {"name", "id", "value"}},
  };
  static const std::set<std::string> none;
  const auto it = keys.find(name);
  return it == keys.end() ? none : it->second;
}

InitialDatumSpec parse_datum(const json& v, const std::string& ptr, int dim) {
  if (!v.is_object()) throw ConfigError(ptr, "expected an object");
  if (!v.contains("name")) throw ConfigError(child(ptr, "name"), "missing required field");
  InitialDatumSpec d;
  d.name = get_string(v, "name", ptr);
  const auto& allowed = datum_keys(d.name);
  if (allowed.empty()) throw ConfigError(child(ptr, "name"), "unknown initial datum '" + d.name + "'");
  reject_unknown(v, ptr, allowed);
  d.id = v.contains("id") ? get_string(v, "id", ptr) : d.name;
  if (v.contains("center")) {
    d.center = get_number_array(v, "center", ptr);
    if (static_cast<int>(d.center.size()) != dim) {
      throw ConfigError(child(ptr, "center"), "center must have dim entries");
    }
  }
  if (v.contains("exponent")) {
    d.exponent = get_number(v, "exponent", ptr);
    if (!(d.exponent > 0.0 && d.exponent <= 1.0)) {
      throw ConfigError(child(ptr, "exponent"), "exponent must lie in (0, 1]");
    }
  }
  if (v.contains("amplitude")) d.amplitude = get_number(v, "amplitude", ptr);
  if (v.contains("value")) d.value = get_number(v, "value", ptr);
  if (v.contains("teeth")) {
    d.teeth = get_int(v, "teeth", ptr);
    if (d.teeth < 1) throw ConfigError(child(ptr, "teeth"), "teeth must be positive");
  }
  if (v.contains("knots")) {
    d.knots = get_int(v, "knots", ptr);
    if (d.knots < 2) throw ConfigError(child(ptr, "knots"), "knots must be at least 2");
  }
  if (v.contains("seed")) {
    const json& s = v.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw ConfigError(child(ptr, "seed"), "expected a nonnegative integer");
    }
    d.seed = s.get<std::uint64_t>();
  }
  if (d.name == "random-nodal" && !d.seed) {
    throw ConfigError(child(ptr, "seed"), "random-nodal datum requires a seed");
  }
  return d;
}

}  // namespace

std::vector<InitialDatumSpec> default_initial_family() {
  std::vector<InitialDatumSpec> family(4);
  family[0].name = family[0].id = "sqrt-cusp";
  family[1].name = family[1].id = "holder";
  family[2].name = family[2].id = "cosine";
  family[3].name = family[3].id = "random-nodal";
  family[3].seed = 20240601;
  return family;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  static const std::set<std::string> top = {
      "preset", "potential", "dim", "N", "tau", "T", "R_schedule", "v_max_override",
      "initial_data", "tolerances", "output_dir", "sample_every", "c_longtime_T", "orbit_count",
      "subgrid_refinement"};
  reject_unknown(doc, "", top);

  ExperimentConfig cfg;
  if (doc.contains("preset")) cfg.preset = get_string(doc, "preset", "");
  if (doc.contains("potential")) cfg.potential = get_string(doc, "potential", "");
  try {
    (void)preset_from_name(cfg.preset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/preset", e.what());
  }
  try {
    (void)potential_from_name(cfg.potential);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/potential", e.what());
  }
  if (doc.contains("dim")) cfg.dim = get_int(doc, "dim", "");
  if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("/dim", "dim must be 1 or 2");
  if (cfg.potential == "cos-2d" && cfg.dim != 2) throw ConfigError("/potential", "cos-2d requires dim 2");
  if (doc.contains("N")) cfg.N = get_int(doc, "N", "");
  if (cfg.N < 8) throw ConfigError("/N", "N must be at least 8");
  if (doc.contains("tau")) cfg.tau = get_number(doc, "tau", "");
  if (!(cfg.tau > 0.0)) throw ConfigError("/tau", "tau must be positive");
  if (doc.contains("T")) cfg.T = get_number(doc, "T", "");
  if (!(cfg.T > 0.0)) throw ConfigError("/T", "T must be positive");
  if (doc.contains("R_schedule")) cfg.R_schedule = get_number_array(doc, "R_schedule", "");
  if (cfg.R_schedule.empty()) throw ConfigError("/R_schedule", "R_schedule must not be empty");
  for (std::size_t i = 0; i < cfg.R_schedule.size(); ++i) {
    if (!(cfg.R_schedule[i] > 1.0)) {
      throw ConfigError("/R_schedule/" + std::to_string(i), "every R must exceed 1");
    }
    if (i > 0 && !(cfg.R_schedule[i] > cfg.R_schedule[i - 1])) {
      throw ConfigError("/R_schedule", "R_schedule not ascending");
    }
  }
  if (doc.contains("v_max_override") && !doc.at("v_max_override").is_null()) {
    cfg.v_max_override = get_number(doc, "v_max_override", "");
    if (!(*cfg.v_max_override > 0.0)) throw ConfigError("/v_max_override", "v_max_override must be positive");
  }
  if (doc.contains("subgrid_refinement")) {
    const json& b = doc.at("subgrid_refinement");
    if (!b.is_boolean()) throw ConfigError("/subgrid_refinement", "expected a boolean");
    cfg.subgrid_refinement = b.get<bool>();
  }
  if (doc.contains("initial_data")) {
    const json& arr = doc.at("initial_data");
    if (!arr.is_array()) throw ConfigError("/initial_data", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.initial_data.push_back(parse_datum(arr[i], "/initial_data/" + std::to_string(i), cfg.dim));
    }
  } else {
    cfg.initial_data = default_initial_family();
  }
  if (cfg.initial_data.empty()) throw ConfigError("/initial_data", "at least one initial datum is required");
  {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < cfg.initial_data.size(); ++i) {
      if (!ids.insert(cfg.initial_data[i].id).second) {
        throw ConfigError("/initial_data/" + std::to_string(i) + "/id", "duplicate datum id");
      }
    }
  }
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    const std::string base = "/tolerances";
    if (!t.is_object()) throw ConfigError(base, "expected an object");
    reject_unknown(t, base, {"flatness", "window", "lip_agreement", "energy_level", "energy_tol",
                             "calibration", "c_agreement", "r_agreement", "r_stability"});
    Tolerances& tol = cfg.tolerances;
    if (t.contains("flatness")) tol.flatness = get_number(t, "flatness", base);
    if (t.contains("window")) tol.window = get_int(t, "window", base);
    if (t.contains("lip_agreement")) tol.lip_agreement = get_number(t, "lip_agreement", base);
    if (t.contains("energy_level")) tol.energy_level = get_number(t, "energy_level", base);
    if (t.contains("energy_tol")) tol.energy_tol = get_number(t, "energy_tol", base);
    if (t.contains("calibration")) tol.calibration = get_number(t, "calibration", base);
    if (t.contains("c_agreement")) tol.c_agreement = get_number(t, "c_agreement", base);
    if (t.contains("r_agreement")) tol.r_agreement = get_number(t, "r_agreement", base);
    if (t.contains("r_stability")) tol.r_stability = get_number(t, "r_stability", base);
    if (tol.window < 1) throw ConfigError(base + "/window", "window must be positive");
    if (!(tol.flatness >= 0.0)) throw ConfigError(base + "/flatness", "flatness must be nonnegative");
  }
  if (doc.contains("output_dir")) cfg.output_dir = get_string(doc, "output_dir", "");
  if (doc.contains("sample_every")) cfg.sample_every = get_int(doc, "sample_every", "");
  if (cfg.sample_every < 1) throw ConfigError("/sample_every", "sample_every must be positive");
  if (doc.contains("c_longtime_T")) cfg.c_longtime_T = get_number(doc, "c_longtime_T", "");
  if (!(cfg.c_longtime_T > 0.0)) throw ConfigError("/c_longtime_T", "c_longtime_T must be positive");
  if (doc.contains("orbit_count")) cfg.orbit_count = get_int(doc, "orbit_count", "");
  if (cfg.orbit_count < 1) throw ConfigError("/orbit_count", "orbit_count must be positive");
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::json ExperimentConfig::to_json() const {
  json data = json::array();
  for (const auto& d : initial_data) {
    json j = {{"name", d.name}, {"id", d.id}};
    if (d.name == "sqrt-cusp" || d.name == "holder") {
      if (!d.center.empty()) j["center"] = d.center;
      j["amplitude"] = d.amplitude;
    }
    if (d.name == "holder") j["exponent"] = d.exponent;
    if (d.name == "sawtooth") {
      j["teeth"] = d.teeth;
      j["amplitude"] = d.amplitude;
    }
    if (d.name == "cosine") j["amplitude"] = d.amplitude;
    if (d.name == "random-nodal") {
      j["knots"] = d.knots;
      j["amplitude"] = d.amplitude;
      j["seed"] = *d.seed;
    }
    if (d.name == "constant") j["value"] = d.value;
    data.push_back(j);
  }
  json out = {
      {"preset", preset},
      {"potential", potential},
      {"dim", dim},
      {"N", N},
      {"tau", tau},
      {"T", T},
      {"R_schedule", R_schedule},
      {"initial_data", data},
      {"tolerances",
       {{"flatness", tolerances.flatness},
        {"window", tolerances.window},
        {"lip_agreement", tolerances.lip_agreement},
        {"energy_level", tolerances.energy_level},
        {"energy_tol", tolerances.energy_tol},
        {"calibration", tolerances.calibration},
        {"c_agreement", tolerances.c_agreement},
        {"r_agreement", tolerances.r_agreement},
        {"r_stability", tolerances.r_stability}}},
      {"output_dir", output_dir},
      {"sample_every", sample_every},
      {"c_longtime_T", c_longtime_T},
      {"orbit_count", orbit_count},
      {"subgrid_refinement", subgrid_refinement},
  };
  out["v_max_override"] = v_max_override ? json(*v_max_override) : json(nullptr);
  return out;
}

}  // namespace hjlab
