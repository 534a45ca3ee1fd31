#pragma once

#include "hjlab/vec.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjlab {

/// Configuration problem located by a JSON pointer into the config document.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct InitialDatumSpec {
  std::string name;  // sqrt-cusp, holder, sawtooth, cosine, random-nodal, constant
  std::string id;
  std::vector<double> center;  // empty means the preset default
  double exponent = 1.0 / 3.0;
  double amplitude = 1.0;
  double value = 0.0;
  int teeth = 3;
  int knots = 64;
  std::optional<std::uint64_t> seed;
};

struct Tolerances {
  double flatness = 0.05;         // detect_t0 band
  int window = 20;                // detect_t0 consecutive samples
  double lip_agreement = 1.1;     // max/min of post-t0* Lipschitz values
  double energy_level = 1.0;      // Omega = {H - c <= level}
  double energy_tol = 0.1;
  double calibration = 5e-2;
  double c_agreement = 5e-2;      // longtime vs infmax
  double r_agreement = 1e-6;      // min over R vs largest R after t0*
  double r_stability = 1e-2;
};

struct ExperimentConfig {
  std::string preset = "mechanical";
  std::string potential = "cos";
  int dim = 1;
  int N = 512;
  double tau = 0.01;
  double T = 30.0;
  std::vector<double> R_schedule{4.0, 8.0};
  std::optional<double> v_max_override;
  std::vector<InitialDatumSpec> initial_data;
  Tolerances tolerances{};
  std::string output_dir = "hjlab_out";
  int sample_every = 10;       // record lip/K every k steps
  double c_longtime_T = 50.0;  // horizon of the longtime critical-value estimate
  int orbit_count = 32;        // orbits reconstructed per datum at t = T
  bool subgrid_refinement = false;

  nlohmann::json to_json() const;
};

/// The four-datum family used by default: sqrt-cusp, Hoelder-1/3, smooth
/// cosine and seeded random-nodal.
std::vector<InitialDatumSpec> default_initial_family();

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config(const std::filesystem::path& path);

}  // namespace hjlab
