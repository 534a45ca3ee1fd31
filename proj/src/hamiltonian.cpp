#include "hjlab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjlab {

Preset preset_from_name(std::string_view name) {
  if (name == "mechanical") return Preset::mechanical;
  if (name == "coercive-nonsuperlinear") return Preset::coercive_nonsuperlinear;
  throw std::invalid_argument("unknown hamiltonian preset '" + std::string(name) + "'");
}

Potential potential_from_name(std::string_view name) {
  if (name == "cos") return Potential::cosine;
  if (name == "zero") return Potential::zero;
  if (name == "cos-2d") return Potential::cosine_2d;
  throw std::invalid_argument("unknown potential '" + std::string(name) + "'");
}

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::mechanical: return "mechanical";
    case Preset::coercive_nonsuperlinear: return "coercive-nonsuperlinear";
  }
  return "?";
}

std::string_view to_string(Potential potential) {
  switch (potential) {
    case Potential::cosine: return "cos";
    case Potential::zero: return "zero";
    case Potential::cosine_2d: return "cos-2d";
  }
  return "?";
}

Vec reduce_to_torus(const Vec& x) {
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double r = x[i] - std::floor(x[i]);
    if (r >= 1.0) r = 0.0;  // floor rounding at -tiny
    out[i] = r;
  }
  return out;
}

HamiltonianModel::HamiltonianModel(Preset preset, Potential potential, int dim)
    : preset_(preset), potential_(potential), dim_(dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (potential == Potential::cosine_2d && dim != 2) {
    throw std::invalid_argument("potential cos-2d requires dim = 2");
  }
}

void HamiltonianModel::check_args(const Vec& x, const Vec& p) const {
  if (x.size() != dim_ || p.size() != dim_) {
    throw std::invalid_argument("argument dimension does not match the model");
  }
  if (!all_finite(x) || !all_finite(p)) throw std::invalid_argument("non-finite argument");
}

double HamiltonianModel::potential(const Vec& x) const {
  switch (potential_) {
    case Potential::zero: return 0.0;
    case Potential::cosine: return std::cos(two_pi * reduce_to_torus(x)[0]);
    case Potential::cosine_2d: {
      const Vec y = reduce_to_torus(x);
      return std::cos(two_pi * y[0]) + 0.5 * std::cos(2.0 * two_pi * y[1]);
    }
  }
  return 0.0;
}

double HamiltonianModel::kinetic(double r) const {
  if (preset_ == Preset::mechanical) return 0.5 * r * r;
  return std::sqrt(1.0 + r * r) - 1.0;
}

double HamiltonianModel::eval(const Vec& x, const Vec& p) const {
  check_args(x, p);
  return kinetic(p.norm()) + potential(x);
}

Vec HamiltonianModel::grad_p(const Vec& x, const Vec& p) const {
  check_args(x, p);
  if (preset_ == Preset::mechanical) return p;
  return p / std::sqrt(1.0 + p.squaredNorm());
}

Mat HamiltonianModel::hess_p(const Vec& x, const Vec& p) const {
  check_args(x, p);
  const Mat eye = Mat::Identity(dim_, dim_);
  if (preset_ == Preset::mechanical) return eye;
  const double s2 = 1.0 + p.squaredNorm();
  const double s = std::sqrt(s2);
  return (eye - p * p.transpose() / s2) / s;
}

double HamiltonianModel::max_potential() const {
  switch (potential_) {
    case Potential::zero: return 0.0;
    case Potential::cosine: return 1.0;
    case Potential::cosine_2d: return 1.5;
  }
  return 0.0;
}

double HamiltonianModel::min_potential() const {
  switch (potential_) {
    case Potential::zero: return 0.0;
    case Potential::cosine: return -1.0;
    case Potential::cosine_2d: return -1.5;
  }
  return 0.0;
}

double HamiltonianModel::coercivity_radius(double level) const {
  const double budget = level - min_potential();
  if (budget < 0.0) return 0.0;
  if (preset_ == Preset::mechanical) return std::sqrt(2.0 * budget);
  const double s = budget + 1.0;
  return std::sqrt(s * s - 1.0);
}

std::string HamiltonianModel::name() const {
  std::ostringstream os;
  os << to_string(preset_) << "/" << to_string(potential_) << "/n=" << dim_;
  return os.str();
}

BetaValue beta_derivatives(double z) {
  if (z <= 0.0) return {};
  const double z2 = z * z;
  return {z2 * z2, 4.0 * z2 * z, 12.0 * z2, 24.0 * z};
}

double beta(double z) { return beta_derivatives(z).value; }

CutoffValue alpha_radial(double R, double r) {
  const double t = r - (R + 1.0);
  if (t <= 0.0) return {1.0, 0.0, 0.0};
  if (t >= 1.0) return {0.0, 0.0, 0.0};
  // alpha = 1 - s(t), s(t) = 6t^5 - 15t^4 + 10t^3
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double s = t3 * (10.0 + t * (-15.0 + 6.0 * t));
  const double ds = 30.0 * t2 * (t - 1.0) * (t - 1.0);
  const double d2s = 60.0 * t * (2.0 * t - 1.0) * (t - 1.0);
  return {1.0 - s, -ds, -d2s};
}

CutoffValue alpha_R(double R, const Vec& p) { return alpha_radial(R, p.norm()); }

Vec alpha_gradient(double R, const Vec& p) {
  const double r = p.norm();
  const CutoffValue a = alpha_radial(R, r);
  if (a.d1 == 0.0) return Vec::Zero(p.size());
  return a.d1 * p / r;
}

Mat alpha_hessian(double R, const Vec& p) {
  const auto n = p.size();
  const double r = p.norm();
  const CutoffValue a = alpha_radial(R, r);
  if (a.d1 == 0.0 && a.d2 == 0.0) return Mat::Zero(n, n);
  // The transition shell starts at R+1 > 0, so r is bounded away from 0 here.
  const Vec u = p / r;
  const Mat radial = u * u.transpose();
  return a.d2 * radial + (a.d1 / r) * (Mat::Identity(n, n) - radial);
}

CutoffBounds cutoff_bounds(double R, int dim) {
  CutoffBounds b;
  const int steps = 4000;
  const auto dirs = sample_directions(dim, 64);
  for (int k = 0; k <= steps; ++k) {
    const double r = R + 1.0 + static_cast<double>(k) / steps;
    const CutoffValue a = alpha_radial(R, r);
    b.max_d1 = std::max(b.max_d1, std::abs(a.d1));
    for (const Vec& u : dirs) {
      b.max_hess_norm1 = std::max(b.max_hess_norm1, norm1(alpha_hessian(R, r * u)));
    }
  }
  return b;
}

Regime regime_of(double R, double r) {
  if (r <= R) return Regime::unmodified;
  if (r <= R + 1.0) return Regime::penalized;
  if (r <= R + 2.0) return Regime::transition;
  return Regime::tail;
}

ModifiedHamiltonian::ModifiedHamiltonian(HamiltonianModel base, double R, double mu,
                                         CutoffBounds bounds, double gamma)
    : base_(base), R_(R), mu_(mu), bounds_(bounds), gamma_(gamma) {
  if (!(R > 1.0)) throw std::invalid_argument("cutoff radius R must exceed 1");
  if (!(mu > 0.0)) throw std::invalid_argument("mu_R must be positive");
}

double ModifiedHamiltonian::eval(const Vec& x, const Vec& p) const {
  if (!all_finite(x) || !all_finite(p)) throw std::invalid_argument("non-finite argument");
  const double r2 = p.squaredNorm();
  const double r = std::sqrt(r2);
  switch (regime_of(R_, r)) {
    case Regime::unmodified: return base_.eval(x, p);
    case Regime::penalized: return base_.eval(x, p) + mu_ * beta(r2 - R_ * R_);
    case Regime::transition:
      return alpha_radial(R_, r).value * base_.eval(x, p) + mu_ * beta(r2 - R_ * R_);
    case Regime::tail: return mu_ * beta(r2 - R_ * R_);
  }
  return 0.0;
}

Vec ModifiedHamiltonian::grad_p(const Vec& x, const Vec& p) const {
  if (!all_finite(x) || !all_finite(p)) throw std::invalid_argument("non-finite argument");
  const double r2 = p.squaredNorm();
  const double r = std::sqrt(r2);
  const Regime regime = regime_of(R_, r);
  if (regime == Regime::unmodified) return base_.grad_p(x, p);
  const Vec penalty = 2.0 * mu_ * beta_derivatives(r2 - R_ * R_).d1 * p;
  switch (regime) {
    case Regime::penalized: return base_.grad_p(x, p) + penalty;
    case Regime::transition: {
      const double a = alpha_radial(R_, r).value;
      return base_.eval(x, p) * alpha_gradient(R_, p) + a * base_.grad_p(x, p) + penalty;
    }
    default: return penalty;
  }
}

Mat ModifiedHamiltonian::hess_p(const Vec& x, const Vec& p) const {
  if (!all_finite(x) || !all_finite(p)) throw std::invalid_argument("non-finite argument");
  const auto n = p.size();
  const double r2 = p.squaredNorm();
  const double r = std::sqrt(r2);
  const Regime regime = regime_of(R_, r);
  if (regime == Regime::unmodified) return base_.hess_p(x, p);
  // 2 mu (2 beta'' Z + beta' E), Z = p p^T
  const BetaValue b = beta_derivatives(r2 - R_ * R_);
  const Mat penalty =
      2.0 * mu_ * (2.0 * b.d2 * (p * p.transpose()) + b.d1 * Mat::Identity(n, n));
  switch (regime) {
    case Regime::penalized: return base_.hess_p(x, p) + penalty;
    case Regime::transition: {
      const double a = alpha_radial(R_, r).value;
      const Vec ga = alpha_gradient(R_, p);
      const Vec gh = base_.grad_p(x, p);
      const Mat w = ga * gh.transpose() + gh * ga.transpose();
      return base_.eval(x, p) * alpha_hessian(R_, p) + w + a * base_.hess_p(x, p) + penalty;
    }
    default: return penalty;
  }
}

double ModifiedHamiltonian::tail_speed(double r) const {
  return 2.0 * mu_ * beta_derivatives(r * r - R_ * R_).d1 * r;
}

std::vector<Vec> sample_directions(int dim, int count) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(make_vec(1.0));
    dirs.push_back(make_vec(-1.0));
    return dirs;
  }
  for (int k = 0; k < count; ++k) {
    const double a = two_pi * (static_cast<double>(k) + 0.5) / count;
    dirs.push_back(make_vec(std::cos(a), std::sin(a)));
  }
  return dirs;
}

std::vector<Vec> sample_points(int dim, int per_dim) {
  std::vector<Vec> pts;
  const double h = 1.0 / per_dim;
  if (dim == 1) {
    for (int i = 0; i < per_dim; ++i) pts.push_back(make_vec(i * h));
  } else {
    for (int j = 0; j < per_dim; ++j) {
      for (int i = 0; i < per_dim; ++i) pts.push_back(make_vec(i * h, j * h));
    }
  }
  return pts;
}

namespace {

struct EigenProbe {
  double min_eigen = std::numeric_limits<double>::infinity();
  Vec x;
  Vec p;
};

EigenProbe probe_hessians(const ModifiedHamiltonian& hr, const SamplingSpec& s) {
  EigenProbe probe;
  const auto xs = sample_points(hr.dim(), s.x_points);
  const auto dirs = sample_directions(hr.dim(), s.directions);
  const double rmax = hr.R() + s.p_extent;
  for (const Vec& x : xs) {
    for (int j = 0; j < s.radial_points; ++j) {
      const double r = rmax * j / std::max(1, s.radial_points - 1);
      for (const Vec& u : dirs) {
        const Vec p = r * u;
        const double e = min_eigenvalue(hr.hess_p(x, p));
        if (e < probe.min_eigen) {
          probe.min_eigen = e;
          probe.x = x;
          probe.p = p;
        }
      }
    }
  }
  return probe;
}

double sampled_gamma(const HamiltonianModel& model, double R, const CutoffBounds& bounds,
                     const SamplingSpec& s) {
  const auto xs = sample_points(model.dim(), s.x_points);
  const auto dirs = sample_directions(model.dim(), s.directions);
  double max_h = 0.0;
  double max_w = 0.0;
  for (const Vec& x : xs) {
    for (int j = 0; j < s.radial_points; ++j) {
      const double r = R + 1.0 + static_cast<double>(j) / std::max(1, s.radial_points - 1);
      for (const Vec& u : dirs) {
        const Vec p = r * u;
        max_h = std::max(max_h, std::abs(model.eval(x, p)));
        const Vec ga = alpha_gradient(R, p);
        const Vec gh = model.grad_p(x, p);
        max_w = std::max(max_w, norm1(ga * gh.transpose() + gh * ga.transpose()));
      }
    }
  }
  return bounds.max_hess_norm1 * max_h + (model.dim() - 1) * max_w;
}

}  // namespace

ModifiedHamiltonian build_modified(const HamiltonianModel& model, double R,
                                   const BuildOptions& options) {
  if (!(R > 1.0)) throw std::invalid_argument("cutoff radius R must exceed 1");
  const CutoffBounds bounds = cutoff_bounds(R, model.dim());
  const double gamma = sampled_gamma(model, R, bounds, options.sampling);
  double mu = std::max(gamma, 1.0) + 1.0;
  EigenProbe last;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    ModifiedHamiltonian hr(model, R, mu, bounds, gamma);
    last = probe_hessians(hr, options.sampling);
    if (last.min_eigen > 0.0) return hr;
    mu *= 2.0;
  }
  std::ostringstream os;
  os << "H_R construction failed for " << model.name() << ", R=" << R
     << ": worst sampled Hessian eigenvalue " << last.min_eigen;
  throw ConstructionFailure(os.str(), last.min_eigen, last.x, last.p);
}

ClaimsReport verify_claims(const ModifiedHamiltonian& hr, const SamplingSpec& s) {
  ClaimsReport rep;
  rep.R = hr.R();
  rep.mu = hr.mu();
  rep.gamma = hr.gamma();
  rep.bounds = hr.alpha_bounds();
  const int n = hr.dim();
  const auto xs = sample_points(n, s.x_points);
  const auto dirs = sample_directions(n, s.directions);
  const double R = hr.R();
  const double rmax = R + s.p_extent;
  const int nr = std::max(2, s.radial_points);

  const EigenProbe probe = probe_hessians(hr, s);
  rep.min_hessian_eigenvalue = probe.min_eigen;
  rep.worst_eigen_x = probe.x;
  rep.worst_eigen_p = probe.p;

  rep.min_superlinear_margin = std::numeric_limits<double>::infinity();
  for (const Vec& x : xs) {
    for (int j = 0; j < nr; ++j) {
      const double frac = static_cast<double>(j) / (nr - 1);
      for (const Vec& u : dirs) {
        ++rep.samples;
        // C^2 consistency against central finite differences.
        const Vec p = (rmax * frac) * u;
        const double delta = 1e-4 * std::max(1.0, p.norm());
        const Vec g = hr.grad_p(x, p);
        const Mat hess = hr.hess_p(x, p);
        const double gscale = std::max(1.0, g.cwiseAbs().maxCoeff());
        const double hscale = std::max(1.0, hess.cwiseAbs().maxCoeff());
        // Stencils straddling a regime boundary measure the jump of the
        // fourth derivative, not C^2; those are covered by the jump probe below.
        bool straddles = false;
        for (double b : {R, R + 1.0, R + 2.0}) straddles = straddles || std::abs(p.norm() - b) <= 2.0 * delta;
        for (int i = 0; i < n && !straddles; ++i) {
          Vec e = Vec::Zero(n);
          e[i] = delta;
          // Richardson-extrapolated central differences, error O(delta^4).
          const Vec e2 = 0.5 * e;
          const double fd = (4.0 * (hr.eval(x, p + e2) - hr.eval(x, p - e2)) / delta -
                             (hr.eval(x, p + e) - hr.eval(x, p - e)) / (2.0 * delta)) / 3.0;
          rep.max_gradient_fd_error =
              std::max(rep.max_gradient_fd_error, std::abs(fd - g[i]) / gscale);
          const Vec col = (4.0 * (hr.grad_p(x, p + e2) - hr.grad_p(x, p - e2)) / delta -
                           (hr.grad_p(x, p + e) - hr.grad_p(x, p - e)) / (2.0 * delta)) / 3.0;
          rep.max_hessian_fd_error = std::max(
              rep.max_hessian_fd_error, (col - hess.col(i)).cwiseAbs().maxCoeff() / hscale);
        }

        if (j == 0) {
          for (double b : {R, R + 1.0, R + 2.0}) {
            const double eps = 1e-9 * b;
            const Vec lo = (b - eps) * u;
            const Vec hi = (b + eps) * u;
            const Mat hl = hr.hess_p(x, lo);
            const Mat hh = hr.hess_p(x, hi);
            const Vec gl = hr.grad_p(x, lo);
            const Vec gh = hr.grad_p(x, hi);
            const double vl = hr.eval(x, lo);
            const double vh = hr.eval(x, hi);
            const double jump = std::max(
                {std::abs(vh - vl) / std::max(1.0, std::abs(vl)),
                 (gh - gl).cwiseAbs().maxCoeff() / std::max(1.0, gl.cwiseAbs().maxCoeff()),
                 (hh - hl).cwiseAbs().maxCoeff() / std::max(1.0, hl.cwiseAbs().maxCoeff())});
            rep.max_boundary_jump = std::max(rep.max_boundary_jump, jump);
          }
        }

        const Vec q = (R * frac) * u;
        rep.max_unmodified_deviation =
            std::max(rep.max_unmodified_deviation, std::abs(hr.eval(x, q) - hr.base().eval(x, q)));

        const Vec t = (R + 2.5 + 3.5 * frac) * u;
        rep.min_superlinear_margin =
            std::min(rep.min_superlinear_margin, hr.eval(x, t) - t.squaredNorm());
      }
    }
  }
  return rep;
}

namespace {
nlohmann::json vec_json(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}
}  // namespace

nlohmann::json ClaimsReport::to_json() const {
  return {
      {"R", R},
      {"mu_R", mu},
      {"gamma_R", gamma},
      {"alpha_max_d1", bounds.max_d1},
      {"alpha_max_hessian_norm1", bounds.max_hess_norm1},
      {"samples", samples},
      {"c2_max_gradient_fd_error", max_gradient_fd_error},
      {"c2_max_hessian_fd_error", max_hessian_fd_error},
      {"c2_max_boundary_jump", max_boundary_jump},
      {"min_hessian_eigenvalue", min_hessian_eigenvalue},
      {"worst_eigen_x", vec_json(worst_eigen_x)},
      {"worst_eigen_p", vec_json(worst_eigen_p)},
      {"min_superlinear_margin", min_superlinear_margin},
      {"max_unmodified_deviation", max_unmodified_deviation},
      {"passed", passed()},
  };
}

}  // namespace hjlab
