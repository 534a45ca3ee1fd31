#include "hjlab/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hjlab {

LagrangianEvaluator::LagrangianEvaluator(ModifiedHamiltonian hr, ConjugateOptions options)
    : hr_(std::move(hr)), options_(options), tail_threshold_(hr_.tail_speed(hr_.R() + 2.0)) {}

Vec velocity_map(const ModifiedHamiltonian& hr, const Vec& x, const Vec& p) {
  return hr.grad_p(x, p);
}

ConjugateResult LagrangianEvaluator::solve_tail(const Vec& v) const {
  // On |p| > R+2, H_R = mu beta(|p|^2 - R^2) is radial, so p* = r v/|v| with
  // 2 r mu beta'(r^2 - R^2) = |v|. The speed is increasing in r.
  const double speed = v.norm();
  double lo = hr_.R() + 2.0;
  double hi = lo + 1.0;
  while (hr_.tail_speed(hi) < speed) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (hr_.tail_speed(mid) < speed ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  ConjugateResult res;
  res.p_star = (r / speed) * v;
  res.value = r * speed - hr_.mu() * beta(r * r - hr_.R() * hr_.R());
  res.tail = true;
  return res;
}

Vec LagrangianEvaluator::grid_guess(const Vec& x, const Vec& v) const {
  const auto dirs = sample_directions(hr_.dim(), options_.fallback_directions);
  const double rmax = hr_.R() + 3.0;
  double best = -std::numeric_limits<double>::infinity();
  Vec best_p = Vec::Zero(hr_.dim());
  for (int j = 0; j < options_.fallback_radial_points; ++j) {
    const double r = rmax * j / (options_.fallback_radial_points - 1);
    for (const Vec& u : dirs) {
      const Vec p = r * u;
      const double f = p.dot(v) - hr_.eval(x, p);
      if (f > best) {
        best = f;
        best_p = p;
      }
    }
  }
  return best_p;
}

ConjugateResult LagrangianEvaluator::solve_newton(const Vec& x, const Vec& v, Vec p) const {
  // Damped Newton ascent on the strictly concave map p -> <p,v> - H_R(x,p).
  double f = p.dot(v) - hr_.eval(x, p);
  for (int it = 0; it < options_.max_iterations; ++it) {
    const Vec residual = v - hr_.grad_p(x, p);
    if (residual.norm() <= options_.gradient_tol * std::max(1.0, v.norm())) {
      return {f, p, it, false};
    }
    const Vec step = hr_.hess_p(x, p).ldlt().solve(residual);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec trial = p + t * step;
      const double ft = trial.dot(v) - hr_.eval(x, trial);
      if (ft >= f + 1e-4 * t * residual.dot(step) || (ft >= f && t < 1e-8)) {
        p = trial;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Line search exhausted at round-off level; accept if stationary enough.
      if (residual.norm() <= 1e-7 * std::max(1.0, v.norm())) return {f, p, it, false};
      std::ostringstream os;
      os << "conjugate line search stalled at |residual| = " << residual.norm();
      throw ConjugateFailure(os.str(), f, p);
    }
  }
  const Vec residual = v - hr_.grad_p(x, p);
  if (residual.norm() <= 1e-7 * std::max(1.0, v.norm())) {
    return {f, p, options_.max_iterations, false};
  }
  throw ConjugateFailure("conjugate search exceeded the iteration budget", f, p);
}

ConjugateResult LagrangianEvaluator::legendre(const Vec& x, const Vec& v) const {
  if (!all_finite(x) || !all_finite(v)) throw std::invalid_argument("non-finite argument");
  if (v.size() != hr_.dim()) throw std::invalid_argument("velocity dimension mismatch");
  if (v.norm() >= tail_threshold_) return solve_tail(v);
  try {
    return solve_newton(x, v, Vec::Zero(hr_.dim()));
  } catch (const ConjugateFailure&) {
    return solve_newton(x, v, grid_guess(x, v));
  }
}

nlohmann::json BiconjugateReport::to_json() const {
  nlohmann::json wx = nlohmann::json::array();
  nlohmann::json wp = nlohmann::json::array();
  for (Eigen::Index i = 0; i < worst_x.size(); ++i) wx.push_back(worst_x[i]);
  for (Eigen::Index i = 0; i < worst_p.size(); ++i) wp.push_back(worst_p[i]);
  return {{"samples", samples}, {"max_error", max_error}, {"worst_x", wx}, {"worst_p", wp}};
}

namespace {

// sup_v [<p,v> - L(x,v)] by Newton ascent in v. The gradient in v is p - p*(v)
// and the Hessian of L is the inverse of the H_R Hessian at p*.
double dual_value(const LagrangianEvaluator& le, const Vec& x, const Vec& p) {
  const ModifiedHamiltonian& hr = le.hamiltonian();
  Vec v = Vec::Zero(p.size());
  ConjugateResult c = le.legendre(x, v);
  double g = p.dot(v) - c.value;
  for (int it = 0; it < 100; ++it) {
    const Vec grad = p - c.p_star;
    if (grad.norm() < 1e-13 * std::max(1.0, p.norm())) break;
    const Vec step = hr.hess_p(x, c.p_star) * grad;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Vec trial = v + t * step;
      const ConjugateResult ct = le.legendre(x, trial);
      const double gt = p.dot(trial) - ct.value;
      if (gt >= g) {
        v = trial;
        c = ct;
        g = gt;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return g;
}

}  // namespace

BiconjugateReport biconjugate_check(const LagrangianEvaluator& le, int x_points, int p_points,
                                    int directions) {
  const ModifiedHamiltonian& hr = le.hamiltonian();
  BiconjugateReport rep;
  const auto xs = sample_points(hr.dim(), x_points);
  const auto dirs = sample_directions(hr.dim(), directions);
  const double rmax = hr.R() + 2.0;
  for (const Vec& x : xs) {
    for (int j = 0; j < p_points; ++j) {
      const double r = rmax * j / std::max(1, p_points - 1);
      for (const Vec& u : dirs) {
        const Vec p = r * u;
        const double err = std::abs(dual_value(le, x, p) - hr.eval(x, p));
        ++rep.samples;
        if (err >= rep.max_error) {
          rep.max_error = err;
          rep.worst_x = x;
          rep.worst_p = p;
        }
      }
    }
  }
  return rep;
}

nlohmann::json tabulate_lagrangian(const LagrangianEvaluator& le, int x_points,
                                   double v_extent, int v_points) {
  const int n = le.hamiltonian().dim();
  nlohmann::json rows = nlohmann::json::array();
  const auto xs = sample_points(n, x_points);
  std::vector<Vec> vs;
  for (int j = 0; j < v_points; ++j) {
    const double a = -v_extent + 2.0 * v_extent * j / std::max(1, v_points - 1);
    if (n == 1) {
      vs.push_back(make_vec(a));
    } else {
      for (int k = 0; k < v_points; ++k) {
        const double b = -v_extent + 2.0 * v_extent * k / std::max(1, v_points - 1);
        vs.push_back(make_vec(a, b));
      }
    }
  }
  for (const Vec& x : xs) {
    for (const Vec& v : vs) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 0; i < n; ++i) row.push_back(x[i]);
      for (int i = 0; i < n; ++i) row.push_back(v[i]);
      row.push_back(le.lagrangian(x, v));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_lagrangian_table(const std::filesystem::path& path, const LagrangianEvaluator& le,
                            int x_points, double v_extent, int v_points) {
  const auto& hr = le.hamiltonian();
  nlohmann::json doc = {
      {"preset", std::string(to_string(hr.base().preset()))},
      {"potential", std::string(to_string(hr.base().potential_kind()))},
      {"dim", hr.dim()},
      {"R", hr.R()},
      {"layout", "row-major over x then v; row = [x..., v..., L]"},
      {"rows", tabulate_lagrangian(le, x_points, v_extent, v_points)},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << doc.dump(1) << '\n';
}

}  // namespace hjlab
