#pragma once

#include "hjlab/config.hpp"
#include "hjlab/critical_value.hpp"
#include "hjlab/lax_oleinik.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace hjlab {

/// Max over nearest-neighbour node pairs of |u(x) - u(y)| / h.
double lipschitz_estimate(const ValueFunction& u);

/// Max over nodes and coordinate directions of the second difference
/// [u(x+he) + u(x-he) - 2u(x)] / h^2, clamped below at 0.
double semiconcavity_estimate(const ValueFunction& u);

/// True when K h exceeds `slope_jump`, i.e. the second difference behaves like
/// an upward kink of that size rather than a bounded curvature.
bool kink_flagged(double K, const TorusGrid& grid, double slope_jump = 0.5);

struct T0Detection {
  bool detected = false;
  std::size_t index = 0;  // first sample of the stable tail
  double t0 = 0.0;        // NaN when not detected
  double iota = 0.0;      // max of the series from t0 on; NaN when not detected
};

/// Earliest sample after which the series stays within relative band
/// `flatness` of its terminal value, provided that tail holds at least
/// `window` samples.
T0Detection detect_t0(const std::vector<double>& times, const std::vector<double>& values,
                      int window = 20, double flatness = 0.05);

struct LipSeries {
  std::vector<double> times;
  std::vector<double> lip;
  std::vector<double> K;
};

struct RunRecord {
  double R = 0.0;
  LipSeries series;
  double last_boundary_time = -1.0;  // negative if the window boundary was never hit
};

struct OrbitSummary {
  std::size_t count = 0;
  double max_normalized_energy = 0.0;
  std::size_t worst_node = 0;
  bool passed = false;
};

struct DatumReport {
  std::string id;
  std::string name;
  std::vector<RunRecord> runs;  // ascending R
  LipSeries combined;           // pointwise min over the R schedule
  T0Detection detection;
  double max_lip_after_t0_star = 0.0;
  double min_lip_after_t0_star = 0.0;
  double max_K_after_t0_star = 0.0;
  double r_disagreement = 0.0;  // sup |min_R u_R - u_{R_max}| over samples at t >= t0*
  double weak_kam_drift = 0.0;
  OrbitSummary orbits;          // largest R, t = T
};

struct RegularityReport {
  nlohmann::json metadata;
  std::vector<DatumReport> data;
  bool all_detected = false;
  double t0_star = 0.0;
  double iota_star = 0.0;
  double lip_spread = 0.0;  // max / min of post-t0* combined lip values across the family
  double K_star = 0.0;      // max post-t0* combined K
  bool K_finite = false;    // K(t) finite for every datum, R and t >= tau
  double max_r_disagreement = 0.0;
  double weak_kam_drift = 0.0;
  double drift_times[2] = {0.0, 0.0};
  CriticalValueEstimate c_longtime;
  CriticalValueEstimate c_infmax;
  double c_est = 0.0;
  double max_orbit_energy = 0.0;
  double omega_slope_bound = 0.0;  // max |p| over {H - c_est <= energy_level}
  CalibrationReport calibration;
  double last_boundary_time = -1.0;  // over all runs
  nlohmann::json checks = nlohmann::json::object();       // gate `passed`
  nlohmann::json diagnostics = nlohmann::json::object();  // reported only
  bool passed = false;

  nlohmann::json to_json() const;
};

class ExperimentFailure : public std::runtime_error {
 public:
  ExperimentFailure(const std::string& what, nlohmann::json partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const nlohmann::json& partial() const { return partial_; }

 private:
  nlohmann::json partial_;
};

/// Evolves every datum under every R of the schedule and assembles the
/// family report. Runs execute concurrently on `threads` workers; assembly is
/// in configuration order, so the report does not depend on `threads`.
RegularityReport run_family_experiment(const ExperimentConfig& config, int threads = 1);

}  // namespace hjlab
