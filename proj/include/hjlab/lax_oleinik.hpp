#pragma once

#include "hjlab/legendre.hpp"
#include "hjlab/torus_grid.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hjlab {

/// Step costs tau * L_R are rounded to multiples of this quantum. With values
/// on the same lattice, every DP sum is exact in double precision, so the
/// discrete semigroup laws hold bit for bit.
inline constexpr int cost_lattice_bits = 40;
double snap_to_cost_lattice(double value);

/// Default velocity window: 1.5 x the largest |dH/dp| on {H <= level + 2},
/// sampled on the base Hamiltonian.
double default_velocity_window(const HamiltonianModel& model, double level);

/// Precomputed one-step costs for a fixed grid, tau and velocity window.
/// Entry (node, w) refers to arrival node `node` reached from
/// `node - offsets[w]` with velocity offsets[w] * h / tau.
struct TransitionTable {
  TorusGrid grid;
  double tau = 0.0;
  double v_max = 0.0;
  std::vector<Offset> offsets;
  std::vector<Vec> velocities;
  std::vector<char> on_boundary;     // per offset
  std::vector<double> cost;          // node-major, snapped tau * L_R(x_node, v_w)
  std::vector<Vec> momenta;          // node-major, p* at (x_node, v_w)
  std::vector<std::uint32_t> source; // node-major, node - offsets[w]
  std::vector<int> offset_of_displacement;  // flat(displacement) -> w, or -1
  bool subgrid_refinement = false;

  std::size_t width() const { return offsets.size(); }
  int offset_index(Offset displacement) const;
};

std::shared_ptr<const TransitionTable> build_transition_table(const TorusGrid& grid,
                                                              const LagrangianEvaluator& le,
                                                              double tau, double v_max,
                                                              int threads = 1,
                                                              bool subgrid_refinement = false);

struct StepResult {
  ValueFunction value;
  std::vector<std::uint32_t> backpointers;
  std::size_t boundary_hits = 0;  // nodes whose argmin sits on the window boundary
};

/// out(x) = min_y [phi(y) + tau L_R(x, (x - y)/tau)] over the velocity window,
/// ties broken to the smallest source index. With table.subgrid_refinement the
/// minimum is lowered by a 3-point parabolic fit along each axis around the
/// argmin; backpointers are unchanged and values leave the cost lattice, so
/// the exact semigroup laws no longer hold.
StepResult one_step(const ValueFunction& phi, const TransitionTable& table, int threads = 1);
StepResult one_step(const ValueFunction& phi, const LagrangianEvaluator& le, double tau,
                    double v_max, int threads = 1);

struct EvolutionTrace {
  std::vector<ValueFunction> snapshots;                   // times k * tau
  std::vector<std::vector<std::uint32_t>> backpointers;   // per step
  std::vector<std::size_t> boundary_hits;                 // per step
  double tau = 0.0;
  std::shared_ptr<const TransitionTable> table;
  std::shared_ptr<const LagrangianEvaluator> lagrangian;
  std::vector<std::string> warnings;

  std::size_t steps() const { return backpointers.size(); }
  /// Time of the last step whose argmin touched the window boundary; negative if none.
  double last_boundary_time() const;
  /// Snapshot index for time t, if t is a stored snapshot time.
  std::optional<std::size_t> snapshot_index(double t) const;
};

/// Iterates one_step round(t_final / tau) times.
EvolutionTrace evolve(const ValueFunction& phi, std::shared_ptr<const LagrangianEvaluator> le,
                      std::shared_ptr<const TransitionTable> table, double t_final,
                      int threads = 1);
EvolutionTrace evolve(const ValueFunction& phi, const LagrangianEvaluator& le, double tau,
                      double t_final, double v_max, int threads = 1);

struct OrbitSample {
  std::vector<std::size_t> nodes;  // gamma(s_0) ... gamma(s_K), s_K = t
  std::vector<Vec> positions;
  std::vector<Vec> velocities;     // v_k = (gamma(s_{k+1}) - gamma(s_k)) / tau, periodic
  std::vector<Vec> momenta;        // p* at (gamma(s_k), v_k)
  std::vector<double> energies;    // base H(gamma(s_k), p_k)
  double start_value = 0.0;        // phi(gamma(0))
  double end_value = 0.0;          // u(x, t)
  double action = 0.0;             // phi(gamma(0)) + sum of step costs, DP order
};

OrbitSample reconstruct_orbit(const EvolutionTrace& trace, std::size_t node, double t);

struct EnergyReport {
  double max_normalized_energy = 0.0;  // max_k H(gamma(s_k), p_k) - c_est
  std::size_t argmax = 0;
  double level = 1.0;
  double tol = 0.0;
  bool passed = false;
};

EnergyReport orbit_energy_check(const OrbitSample& orbit, const HamiltonianModel& model,
                                double c_est, double level = 1.0, double tol = 0.1);

struct CalibrationOptions {
  double v_extent = 4.0;
  int v_points = 161;                     // per dimension
  double slope_jump = 0.5;  // skip kinks: nodes with |D^2 u| h above this, as in kink_flagged
};

struct CalibrationReport {
  double min_value = 0.0;  // min over nodes and v of L(x,v) - <Du,v> + c
  std::size_t worst_node = 0;
  std::size_t nodes_checked = 0;
  double max_equality_gap = 0.0;  // |value| at v = dH_R/dp(x, Du(x))
};

CalibrationReport calibration_check(const ValueFunction& u_bar, const LagrangianEvaluator& le,
                                    double c_est, const CalibrationOptions& options = {});

}  // namespace hjlab
