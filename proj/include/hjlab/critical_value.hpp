#pragma once

#include "hjlab/lax_oleinik.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hjlab {

enum class CriticalMethod { longtime, infmax };
std::string_view to_string(CriticalMethod method);

struct CriticalValueEstimate {
  double c_est = 0.0;
  CriticalMethod method = CriticalMethod::longtime;
  nlohmann::json diagnostics = nlohmann::json::object();
  bool unreliable = false;       // longtime: window boundary hit in the measuring interval
  bool stalled = false;          // infmax: no progress over the stall horizon
  std::vector<double> history;   // infmax: best exact objective after each accepted iteration

  nlohmann::json to_json(const HamiltonianModel& model) const;
};

struct LongtimeOptions {
  double v_max = 0.0;  // 0 selects default_velocity_window at the certificate level
  int threads = 1;
};

/// c = -(mean u(T) - mean u(T/2)) / (T/2) for u evolved from phi = 0.
CriticalValueEstimate estimate_c_longtime(const LagrangianEvaluator& le, const TorusGrid& grid,
                                          double tau, double T,
                                          const LongtimeOptions& options = {});

struct InfmaxOptions {
  int stages = 8;                 // softmax temperature halved per stage
  double initial_temperature = 0.05;
  int iterations_per_stage = 300;
  int final_iterations = 300;     // exact-max subgradient stage
  int stall_horizon = 100;
  double stall_tolerance = 1e-8;
  std::vector<double> initial;    // starting grid function; empty means u = 0
};

/// Minimizes max_x H_R(x, Du(x)) over grid functions u with central-difference
/// gradients. The estimate is the best exact max over all iterates, so the
/// recorded history is nonincreasing.
CriticalValueEstimate estimate_c_infmax(const ModifiedHamiltonian& hr, const TorusGrid& grid,
                                        const InfmaxOptions& options = {});

/// Exact objective max_x H_R(x, Du(x)) of a grid function.
double infmax_objective(const ModifiedHamiltonian& hr, const TorusGrid& grid,
                        const std::vector<double>& u);

struct StabilityOptions {
  double tolerance = 1e-2;
  bool with_longtime = false;
  double tau = 0.01;
  double T = 50.0;
  int threads = 1;
  BuildOptions build{};
  InfmaxOptions infmax{};
};

struct StabilityRow {
  double R = 0.0;
  double c_infmax = 0.0;
  double c_longtime = 0.0;
  bool has_longtime = false;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double R0_est = 0.0;
  double max_gap = 0.0;  // max pairwise gap among R >= R0_est
  bool passed = false;
  std::string note;
  nlohmann::json to_json() const;
};

StabilityReport check_cR_stability(const HamiltonianModel& model, const std::vector<double>& R_list,
                                   const TorusGrid& grid, const StabilityOptions& options = {});

}  // namespace hjlab
