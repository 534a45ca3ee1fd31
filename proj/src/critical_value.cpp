#include "hjlab/critical_value.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace hjlab {

std::string_view to_string(CriticalMethod method) {
  return method == CriticalMethod::longtime ? "longtime" : "infmax";
}

nlohmann::json CriticalValueEstimate::to_json(const HamiltonianModel& model) const {
  return {
      {"preset", std::string(to_string(model.preset()))},
      {"potential", std::string(to_string(model.potential_kind()))},
      {"method", std::string(to_string(method))},
      {"c_est", c_est},
      {"diagnostics", diagnostics},
  };
}

CriticalValueEstimate estimate_c_longtime(const LagrangianEvaluator& le, const TorusGrid& grid,
                                          double tau, double T, const LongtimeOptions& options) {
  if (!(T > 0.0) || !(tau > 0.0)) throw std::invalid_argument("tau and T must be positive");
  const HamiltonianModel& model = le.hamiltonian().base();
  const double v_max = options.v_max > 0.0
                           ? options.v_max
                           : default_velocity_window(model, model.max_potential());
  const auto table = build_transition_table(grid, le, tau, v_max, options.threads);
  const auto steps = static_cast<std::size_t>(std::llround(T / tau));
  const std::size_t half = steps / 2;
  if (half == 0) throw std::invalid_argument("T must cover at least two steps");

  ValueFunction u = ValueFunction::constant(grid, 0.0);
  double mean_half = 0.0;
  std::size_t late_hits = 0;
  for (std::size_t k = 1; k <= steps; ++k) {
    StepResult r = one_step(u, *table, options.threads);
    if (k > half) late_hits += r.boundary_hits;
    u = std::move(r.value);
    if (k == half) mean_half = u.mean();
  }
  const double span = static_cast<double>(steps - half) * tau;
  CriticalValueEstimate est;
  est.method = CriticalMethod::longtime;
  est.c_est = -(u.mean() - mean_half) / span;
  est.unreliable = late_hits > 0;
  est.diagnostics = {
      {"T", static_cast<double>(steps) * tau},
      {"tau", tau},
      {"N", grid.points()},
      {"R", le.hamiltonian().R()},
      {"v_max", v_max},
      {"oscillation_at_T", u.max() - u.min()},
      {"late_boundary_hits", late_hits},
      {"unreliable", est.unreliable},
  };
  return est;
}

namespace {

struct GradientField {
  std::vector<Vec> du;
  std::vector<double> h;  // H_R(x_i, Du_i)
};

GradientField evaluate(const ModifiedHamiltonian& hr, const TorusGrid& grid,
                       const std::vector<Vec>& xs, const std::vector<double>& u) {
  const int n = grid.dim();
  const double inv2h = 0.5 * grid.points();
  GradientField f;
  f.du.resize(grid.size());
  f.h.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec d(n);
    for (int k = 0; k < n; ++k) {
      Offset e{0, 0};
      e[k] = 1;
      d[k] = (u[grid.shifted(i, e)] - u[grid.shifted(i, {-e[0], -e[1]})]) * inv2h;
    }
    f.h[i] = hr.eval(xs[i], d);
    f.du[i] = d;
  }
  return f;
}

double smooth_max(const std::vector<double>& h, double temperature) {
  const double m = *std::max_element(h.begin(), h.end());
  double s = 0.0;
  for (double v : h) s += std::exp((v - m) / temperature);
  return m + temperature * std::log(s);
}

// Gradient in u of sum_i w_i H_R(x_i, Du_i) for the weights w.
std::vector<double> pullback(const ModifiedHamiltonian& hr, const TorusGrid& grid,
                             const std::vector<Vec>& xs, const GradientField& f,
                             const std::vector<double>& w) {
  const int n = grid.dim();
  const double inv2h = 0.5 * grid.points();
  std::vector<double> g(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Vec gp = hr.grad_p(xs[i], f.du[i]);
    for (int k = 0; k < n; ++k) {
      Offset e{0, 0};
      e[k] = 1;
      g[grid.shifted(i, e)] += w[i] * gp[k] * inv2h;
      g[grid.shifted(i, {-e[0], -e[1]})] -= w[i] * gp[k] * inv2h;
    }
  }
  return g;
}

}  // namespace

double infmax_objective(const ModifiedHamiltonian& hr, const TorusGrid& grid,
                        const std::vector<double>& u) {
  std::vector<Vec> xs;
  for (std::size_t i = 0; i < grid.size(); ++i) xs.push_back(grid.point(i));
  const GradientField f = evaluate(hr, grid, xs, u);
  return *std::max_element(f.h.begin(), f.h.end());
}

namespace {

// Two-loop recursion: approximate inverse-Hessian times g.
std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<std::vector<double>>& S,
                                    const std::deque<std::vector<double>>& Y) {
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  std::vector<double> q(g);
  std::vector<double> alpha(S.size());
  for (std::size_t k = S.size(); k-- > 0;) {
    alpha[k] = dot(S[k], q) / dot(Y[k], S[k]);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * Y[k][i];
  }
  if (!S.empty()) {
    const double gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
    for (double& v : q) v *= gamma;
  }
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double beta = dot(Y[k], q) / dot(Y[k], S[k]);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += S[k][i] * (alpha[k] - beta);
  }
  return q;
}

// Softmax weights of the field at the given temperature, or uniform weights
// over the maximizers for the exact stage.
std::vector<double> max_weights(const std::vector<double>& h, double exact, double temperature, bool exact_stage) {
  std::vector<double> w(h.size(), 0.0);
  if (exact_stage) {
    const double tie = exact - 1e-12 * std::max(1.0, std::abs(exact));
    double count = 0.0;
    for (double v : h) count += v >= tie ? 1.0 : 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) w[i] = h[i] >= tie ? 1.0 / count : 0.0;
    return w;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += (w[i] = std::exp((h[i] - exact) / temperature));
  for (double& wi : w) wi /= s;
  return w;
}

}  // namespace

CriticalValueEstimate estimate_c_infmax(const ModifiedHamiltonian& hr, const TorusGrid& grid,
                                        const InfmaxOptions& options) {
  if (hr.dim() != grid.dim()) throw std::invalid_argument("dimension mismatch");
  std::vector<Vec> xs;
  for (std::size_t i = 0; i < grid.size(); ++i) xs.push_back(grid.point(i));
  std::vector<double> u = options.initial.empty() ? std::vector<double>(grid.size(), 0.0)
                                                  : options.initial;
  if (u.size() != grid.size()) throw std::invalid_argument("initial guess size mismatch");

  GradientField field = evaluate(hr, grid, xs, u);
  double exact = *std::max_element(field.h.begin(), field.h.end());
  CriticalValueEstimate est;
  est.method = CriticalMethod::infmax;
  est.history.push_back(exact);

  int accepted = 0;
  int total_iterations = 0;
  bool stalled = false;
  double best = exact;
  std::vector<double> best_u = u;
  constexpr std::size_t memory = 10;

  // Stages 0..stages-1 use softmax smoothing; the final stage uses the exact max.
  for (int stage = 0; stage <= options.stages; ++stage) {
    const bool exact_stage = stage == options.stages;
    const double temperature = options.initial_temperature * std::ldexp(1.0, -stage);
    const int iters = exact_stage ? options.final_iterations : options.iterations_per_stage;
    auto objective = [&](const GradientField& f, double fmax) {
      return exact_stage ? fmax : smooth_max(f.h, temperature);
    };
    if (u != best_u) {  // each stage restarts from the incumbent
      u = best_u;
      field = evaluate(hr, grid, xs, u);
      exact = best;
    }
    std::deque<std::vector<double>> S, Y;
    double current = objective(field, exact);
    double window_start = current;
    int since_window = 0;
    stalled = false;
    std::vector<double> g = pullback(hr, grid, xs, field, max_weights(field.h, exact, temperature, exact_stage));
    for (int it = 0; it < iters; ++it, ++total_iterations) {
      double gnorm2 = 0.0;
      for (double gi : g) gnorm2 += gi * gi;
      if (gnorm2 == 0.0) break;

      bool moved = false;
      // Quasi-Newton direction first (smoothed stages only), then steepest descent.
      for (int attempt = 0; attempt < 2 && !moved; ++attempt) {
        const bool quasi_newton = attempt == 0;
        if (quasi_newton && (exact_stage || S.empty())) continue;
        std::vector<double> d = quasi_newton ? lbfgs_direction(g, S, Y) : g;
        double slope = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) slope += d[i] * g[i];
        if (!(slope > 0.0)) continue;
        double step = quasi_newton ? 1.0 : 1e-2 / std::sqrt(gnorm2) * std::max(1.0, std::abs(current));
        for (int ls = 0; ls < 50; ++ls, step *= 0.5) {
          std::vector<double> trial(u);
          for (std::size_t i = 0; i < u.size(); ++i) trial[i] -= step * d[i];
          GradientField tf = evaluate(hr, grid, xs, trial);
          const double texact = *std::max_element(tf.h.begin(), tf.h.end());
          const double tval = objective(tf, texact);
          if (tval < current - 1e-4 * step * slope) {
            std::vector<double> tg =
                pullback(hr, grid, xs, tf, max_weights(tf.h, texact, temperature, exact_stage));
            std::vector<double> sk(u.size()), yk(u.size());
            double sy = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
              sk[i] = trial[i] - u[i];
              yk[i] = tg[i] - g[i];
              sy += sk[i] * yk[i];
            }
            if (sy > 1e-12) {
              S.push_back(std::move(sk));
              Y.push_back(std::move(yk));
              if (S.size() > memory) {
                S.pop_front();
                Y.pop_front();
              }
            }
            u = std::move(trial);
            field = std::move(tf);
            exact = texact;
            current = tval;
            g = std::move(tg);
            moved = true;
            break;
          }
        }
        if (!moved && quasi_newton) {
          S.clear();
          Y.clear();
        }
      }
      if (!moved) break;
      ++accepted;
      if (exact < best) {
        best = exact;
        best_u = u;
      }
      est.history.push_back(best);

      if (++since_window >= options.stall_horizon) {
        const double rel = (window_start - current) / std::max(1.0, std::abs(window_start));
        if (rel < options.stall_tolerance) {
          stalled = true;
          break;
        }
        window_start = current;
        since_window = 0;
      }
    }
  }
  est.c_est = best;
  est.stalled = stalled;
  est.diagnostics = {
      {"N", grid.points()},
      {"R", hr.R()},
      {"accepted_iterations", accepted},
      {"iterations", total_iterations},
      {"initial_objective", est.history.front()},
      {"stalled", stalled},
  };
  return est;
}

nlohmann::json StabilityReport::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"R", r.R}, {"c_infmax", r.c_infmax}};
    if (r.has_longtime) row["c_longtime"] = r.c_longtime;
    table.push_back(row);
  }
  return {{"rows", table}, {"R0_est", R0_est}, {"max_gap", max_gap}, {"passed", passed}, {"note", note}};
}

namespace {

// Pass when all pairwise gaps among R >= R0 stay within tol, R0 being the first
// radius whose gap to its successor is below tol.
bool stable_tail(const std::vector<double>& c, double tol, std::size_t& start, double& max_gap) {
  start = c.size();
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    if (std::abs(c[i + 1] - c[i]) <= tol) {
      start = i;
      break;
    }
  }
  if (start == c.size()) return false;
  max_gap = 0.0;
  for (std::size_t i = start; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) max_gap = std::max(max_gap, std::abs(c[i] - c[j]));
  }
  return max_gap <= tol;
}

}  // namespace

StabilityReport check_cR_stability(const HamiltonianModel& model, const std::vector<double>& R_list,
                                   const TorusGrid& grid, const StabilityOptions& options) {
  if (R_list.empty()) throw std::invalid_argument("R_list must not be empty");
  if (!std::is_sorted(R_list.begin(), R_list.end())) throw std::invalid_argument("R_list must be ascending");
  StabilityReport rep;
  std::vector<double> ci, cl;
  for (double R : R_list) {
    const ModifiedHamiltonian hr = build_modified(model, R, options.build);
    StabilityRow row;
    row.R = R;
    row.c_infmax = estimate_c_infmax(hr, grid, options.infmax).c_est;
    ci.push_back(row.c_infmax);
    if (options.with_longtime) {
      LongtimeOptions lt;
      lt.threads = options.threads;
      row.c_longtime =
          estimate_c_longtime(LagrangianEvaluator(hr), grid, options.tau, options.T, lt).c_est;
      row.has_longtime = true;
      cl.push_back(row.c_longtime);
    }
    rep.rows.push_back(row);
  }
  if (R_list.size() == 1) {
    rep.passed = true;
    rep.R0_est = R_list.front();
    rep.note = "single radius: stability holds vacuously";
    return rep;
  }
  std::size_t start = 0;
  double gap = 0.0;
  bool ok = stable_tail(ci, options.tolerance, start, gap);
  rep.R0_est = start < R_list.size() ? R_list[start] : R_list.back();
  rep.max_gap = gap;
  if (options.with_longtime) {
    std::size_t start_l = 0;
    double gap_l = 0.0;
    ok = stable_tail(cl, options.tolerance, start_l, gap_l) && ok;
    if (start_l < R_list.size()) rep.R0_est = std::max(rep.R0_est, R_list[start_l]);
    rep.max_gap = std::max(rep.max_gap, gap_l);
  }
  rep.passed = ok;
  rep.note = ok ? "c_R constant within tolerance from R0_est on" : "c_R not stable within tolerance";
  return rep;
}

}  // namespace hjlab
