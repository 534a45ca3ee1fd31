#include "hjlab/lax_oleinik.hpp"

#include "hjlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hjlab {

double snap_to_cost_lattice(double value) {
  return std::ldexp(std::nearbyint(std::ldexp(value, cost_lattice_bits)), -cost_lattice_bits);
}

double default_velocity_window(const HamiltonianModel& model, double level) {
  const double energy = level + 2.0;
  const double radius = model.coercivity_radius(energy);
  const auto xs = sample_points(model.dim(), 64);
  const auto dirs = sample_directions(model.dim(), 32);
  double best = 0.0;
  const int radial = 256;
  for (const Vec& x : xs) {
    for (int j = 0; j <= radial; ++j) {
      const double r = radius * j / radial;
      for (const Vec& u : dirs) {
        const Vec p = r * u;
        if (model.eval(x, p) <= energy) best = std::max(best, model.grad_p(x, p).norm());
      }
    }
  }
  return 1.5 * best;
}

int TransitionTable::offset_index(Offset displacement) const {
  return offset_of_displacement[grid.flat_index(displacement)];
}

namespace {

std::vector<Offset> window_offsets(const TorusGrid& grid, double radius,
                                   std::vector<char>& on_boundary) {
  const int n = grid.points();
  const int half = n / 2;
  const int lo = (n % 2 == 0) ? -half + 1 : -half;  // -N/2 duplicates +N/2
  const int reach = std::min(half, static_cast<int>(std::floor(radius)) + 1);
  const double r2 = radius * radius * (1.0 + 1e-12);
  auto inside = [&](int a, int b) { return double(a) * a + double(b) * b <= r2; };
  std::vector<Offset> out;
  on_boundary.clear();
  const int reach1 = grid.dim() == 2 ? reach : 0;
  for (int b = std::max(lo, -reach1); b <= std::min(half, reach1); ++b) {
    for (int a = std::max(lo, -reach); a <= std::min(half, reach); ++a) {
      if (!inside(a, b)) continue;
      bool boundary = false;
      for (int i = 0; i < grid.dim(); ++i) {
        for (int s : {-1, 1}) {
          Offset k{a, b};
          k[i] += s;
          if (k[i] > half || k[i] < lo) continue;  // wraps onto covered nodes
          if (!inside(k[0], k[1])) boundary = true;
        }
      }
      out.push_back({a, b});
      on_boundary.push_back(boundary ? 1 : 0);
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<const TransitionTable> build_transition_table(const TorusGrid& grid,
                                                              const LagrangianEvaluator& le,
                                                              double tau, double v_max,
                                                              int threads, bool subgrid_refinement) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(v_max > 0.0) || !std::isfinite(v_max)) throw std::invalid_argument("v_max must be positive");
  if (le.hamiltonian().dim() != grid.dim()) throw std::invalid_argument("dimension mismatch");
  const double h = grid.spacing();
  const double radius = v_max * tau / h;
  if (radius < 1.0 - 1e-12) {
    throw std::invalid_argument("empty velocity window: v_max * tau must be at least h");
  }
  auto table = std::make_shared<TransitionTable>(TransitionTable{grid, tau, v_max, {}, {}, {}, {}, {}, {}, {}, subgrid_refinement});
  table->offsets = window_offsets(grid, std::max(radius, 1.0), table->on_boundary);
  const std::size_t W = table->offsets.size();
  for (const Offset& k : table->offsets) {
    table->velocities.push_back(grid.dim() == 1 ? make_vec(k[0] * h / tau)
                                                : make_vec(k[0] * h / tau, k[1] * h / tau));
  }
  table->offset_of_displacement.assign(grid.size(), -1);
  for (std::size_t w = 0; w < W; ++w) {
    table->offset_of_displacement[grid.flat_index(table->offsets[w])] = static_cast<int>(w);
  }
  const std::size_t nodes = grid.size();
  table->cost.resize(nodes * W);
  table->momenta.resize(nodes * W);
  table->source.resize(nodes * W);
  parallel_for(nodes, threads, [&](std::size_t node) {
    const Vec x = grid.point(node);
    for (std::size_t w = 0; w < W; ++w) {
      const ConjugateResult c = le.legendre(x, table->velocities[w]);
      table->cost[node * W + w] = snap_to_cost_lattice(tau * c.value);
      table->momenta[node * W + w] = c.p_star;
      const Offset k = table->offsets[w];
      table->source[node * W + w] = static_cast<std::uint32_t>(grid.shifted(node, {-k[0], -k[1]}));
    }
  });
  return table;
}

namespace {

// Sum over axes of the vertex drop of the parabola through the argmin and its
// two axis neighbours; zero when a neighbour is outside the window.
double parabolic_correction(const TransitionTable& table, const double* values, std::size_t node,
                            std::size_t w, double f0) {
  const std::size_t W = table.width();
  double drop = 0.0;
  for (int axis = 0; axis < table.grid.dim(); ++axis) {
    double f[2];
    bool ok = true;
    for (int side = 0; side < 2 && ok; ++side) {
      Offset k = table.offsets[w];
      k[axis] += side == 0 ? -1 : 1;
      const int n = table.offset_index(k);
      ok = n >= 0 && table.offsets[static_cast<std::size_t>(n)] == k;
      if (ok) f[side] = values[table.source[node * W + n]] + table.cost[node * W + n];
    }
    const double curvature = f[0] - 2.0 * f0 + f[1];
    if (ok && curvature > 0.0) drop += (f[1] - f[0]) * (f[1] - f[0]) / (8.0 * curvature);
  }
  return -drop;
}

}  // namespace

StepResult one_step(const ValueFunction& phi, const TransitionTable& table, int threads) {
  if (!(phi.grid == table.grid)) throw std::invalid_argument("value function grid differs from table");
  const std::size_t nodes = table.grid.size();
  const std::size_t W = table.width();
  std::vector<double> out(nodes);
  std::vector<std::uint32_t> back(nodes);
  std::vector<char> hit(nodes, 0);
  const double* src_values = phi.values.data();
  parallel_for(nodes, threads, [&](std::size_t node) {
    const double* cost = table.cost.data() + node * W;
    const std::uint32_t* src = table.source.data() + node * W;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_src = std::numeric_limits<std::uint32_t>::max();
    std::size_t best_w = 0;
    for (std::size_t w = 0; w < W; ++w) {
      const double val = src_values[src[w]] + cost[w];
      if (val < best || (val == best && src[w] < best_src)) {
        best = val;
        best_src = src[w];
        best_w = w;
      }
    }
    if (table.subgrid_refinement) best += parabolic_correction(table, src_values, node, best_w, best);
    out[node] = best;
    back[node] = best_src;
    hit[node] = table.on_boundary[best_w];
  });
  StepResult res{ValueFunction(table.grid, std::move(out), phi.time + table.tau), std::move(back), 0};
  res.boundary_hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  return res;
}

StepResult one_step(const ValueFunction& phi, const LagrangianEvaluator& le, double tau,
                    double v_max, int threads) {
  const auto table = build_transition_table(phi.grid, le, tau, v_max, threads);
  return one_step(phi, *table, threads);
}

double EvolutionTrace::last_boundary_time() const {
  for (std::size_t k = boundary_hits.size(); k-- > 0;) {
    if (boundary_hits[k] > 0) return snapshots[k + 1].time;
  }
  return -1.0;
}

std::optional<std::size_t> EvolutionTrace::snapshot_index(double t) const {
  if (snapshots.empty()) return std::nullopt;
  const double k = (t - snapshots.front().time) / tau;
  const double rk = std::nearbyint(k);
  if (std::abs(k - rk) > 1e-6 || rk < 0 || rk >= static_cast<double>(snapshots.size())) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(rk);
}

EvolutionTrace evolve(const ValueFunction& phi, std::shared_ptr<const LagrangianEvaluator> le,
                      std::shared_ptr<const TransitionTable> table, double t_final,
                      int threads) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("t_final must be nonnegative");
  EvolutionTrace trace;
  trace.tau = table->tau;
  trace.table = table;
  trace.lagrangian = std::move(le);
  const double ratio = t_final / table->tau;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "t_final=" << t_final << " is not a multiple of tau=" << table->tau << "; rounded to "
       << steps * table->tau;
    trace.warnings.push_back(os.str());
  }
  trace.snapshots.reserve(steps + 1);
  trace.backpointers.reserve(steps);
  trace.snapshots.push_back(phi);
  for (std::size_t k = 0; k < steps; ++k) {
    StepResult r = one_step(trace.snapshots.back(), *table, threads);
    r.value.time = phi.time + static_cast<double>(k + 1) * table->tau;
    trace.boundary_hits.push_back(r.boundary_hits);
    trace.backpointers.push_back(std::move(r.backpointers));
    trace.snapshots.push_back(std::move(r.value));
  }
  return trace;
}

EvolutionTrace evolve(const ValueFunction& phi, const LagrangianEvaluator& le, double tau,
                      double t_final, double v_max, int threads) {
  auto table = build_transition_table(phi.grid, le, tau, v_max, threads);
  return evolve(phi, std::make_shared<const LagrangianEvaluator>(le), std::move(table), t_final,
                threads);
}

OrbitSample reconstruct_orbit(const EvolutionTrace& trace, std::size_t node, double t) {
  const auto idx = trace.snapshot_index(t);
  if (!idx) throw std::invalid_argument("no snapshot stored at the requested time");
  const TransitionTable& table = *trace.table;
  if (node >= table.grid.size()) throw std::invalid_argument("node index out of range");
  const std::size_t K = *idx;
  const std::size_t W = table.width();
  OrbitSample orbit;
  orbit.nodes.assign(K + 1, 0);
  orbit.nodes[K] = node;
  for (std::size_t j = K; j > 0; --j) orbit.nodes[j - 1] = trace.backpointers[j - 1][orbit.nodes[j]];

  const HamiltonianModel& model = trace.lagrangian->hamiltonian().base();
  orbit.start_value = trace.snapshots[0].values[orbit.nodes[0]];
  orbit.end_value = trace.snapshots[K].values[node];
  double action = orbit.start_value;
  for (std::size_t k = 0; k <= K; ++k) orbit.positions.push_back(table.grid.point(orbit.nodes[k]));
  for (std::size_t k = 0; k < K; ++k) {
    const Offset d = table.grid.displacement(orbit.nodes[k], orbit.nodes[k + 1]);
    const int w = table.offset_index(d);
    if (w < 0) throw std::logic_error("backpointer outside the velocity window");
    orbit.velocities.push_back(table.velocities[w]);
    const Vec& p = table.momenta[orbit.nodes[k] * W + static_cast<std::size_t>(w)];
    orbit.momenta.push_back(p);
    orbit.energies.push_back(model.eval(orbit.positions[k], p));
    action = action + table.cost[orbit.nodes[k + 1] * W + static_cast<std::size_t>(w)];
  }
  orbit.action = action;
  return orbit;
}

EnergyReport orbit_energy_check(const OrbitSample& orbit, const HamiltonianModel& model,
                                double c_est, double level, double tol) {
  EnergyReport rep;
  rep.level = level;
  rep.tol = tol;
  rep.max_normalized_energy = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < orbit.momenta.size(); ++k) {
    const double e = model.eval(orbit.positions[k], orbit.momenta[k]) - c_est;
    if (e > rep.max_normalized_energy) {
      rep.max_normalized_energy = e;
      rep.argmax = k;
    }
  }
  rep.passed = rep.max_normalized_energy <= level + tol;
  return rep;
}

CalibrationReport calibration_check(const ValueFunction& u_bar, const LagrangianEvaluator& le,
                                    double c_est, const CalibrationOptions& options) {
  const TorusGrid& grid = u_bar.grid;
  const int n = grid.dim();
  const double h = grid.spacing();
  const ModifiedHamiltonian& hr = le.hamiltonian();

  std::vector<Vec> vs;
  const int m = std::max(2, options.v_points);
  for (int a = 0; a < m; ++a) {
    const double va = -options.v_extent + 2.0 * options.v_extent * a / (m - 1);
    if (n == 1) {
      vs.push_back(make_vec(va));
    } else {
      for (int b = 0; b < m; ++b) {
        vs.push_back(make_vec(va, -options.v_extent + 2.0 * options.v_extent * b / (m - 1)));
      }
    }
  }

  CalibrationReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Vec du(n);
    bool smooth = true;
    for (int i = 0; i < n; ++i) {
      Offset e{0, 0};
      e[i] = 1;
      const double up = u_bar.values[grid.shifted(node, e)];
      const double down = u_bar.values[grid.shifted(node, {-e[0], -e[1]})];
      const double mid = u_bar.values[node];
      du[i] = (up - down) / (2.0 * h);
      if (std::abs(up + down - 2.0 * mid) / h > options.slope_jump) smooth = false;
    }
    if (!smooth) continue;
    ++rep.nodes_checked;
    const Vec x = grid.point(node);
    for (const Vec& v : vs) {
      const double val = le.lagrangian(x, v) - du.dot(v) + c_est;
      if (val < rep.min_value) {
        rep.min_value = val;
        rep.worst_node = node;
      }
    }
    const Vec v_eq = velocity_map(hr, x, du);
    const double eq = le.lagrangian(x, v_eq) - du.dot(v_eq) + c_est;
    rep.max_equality_gap = std::max(rep.max_equality_gap, std::abs(eq));
  }
  return rep;
}

}  // namespace hjlab
