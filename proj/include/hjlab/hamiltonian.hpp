#pragma once

#include "hjlab/vec.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hjlab {

enum class Preset {
  mechanical,               // |p|^2/2 + V(x)
  coercive_nonsuperlinear,  // sqrt(1+|p|^2) - 1 + V(x)
};

enum class Potential {
  cosine,     // cos(2 pi x1)
  zero,       // 0
  cosine_2d,  // cos(2 pi x1) + 0.5 cos(4 pi x2), n = 2 only
};

Preset preset_from_name(std::string_view name);
Potential potential_from_name(std::string_view name);
std::string_view to_string(Preset preset);
std::string_view to_string(Potential potential);

/// Convex, coercive Hamiltonian on the flat torus T^n, n in {1, 2}.
///
/// Points are reduced to the fundamental domain [0,1)^n before the potential
/// is evaluated; non-finite arguments raise std::invalid_argument.
class HamiltonianModel {
 public:
  HamiltonianModel(Preset preset, Potential potential, int dim);

  Preset preset() const { return preset_; }
  Potential potential_kind() const { return potential_; }
  int dim() const { return dim_; }

  double potential(const Vec& x) const;
  double eval(const Vec& x, const Vec& p) const;
  Vec grad_p(const Vec& x, const Vec& p) const;
  Mat hess_p(const Vec& x, const Vec& p) const;

  // Kinetic part K(|p|) and its radial derivatives; H = K + V.
  double kinetic(double r) const;

  double max_potential() const;
  double min_potential() const;

  /// Radius such that H(x,p) <= level implies |p| <= radius for every x.
  /// Returns 0 when the sublevel set is empty.
  double coercivity_radius(double level) const;

  std::string name() const;

 private:
  void check_args(const Vec& x, const Vec& p) const;

  Preset preset_;
  Potential potential_;
  int dim_;
};

/// Reduce a point to [0,1)^n.
Vec reduce_to_torus(const Vec& x);

struct BetaValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// Penalty beta(z) = z^4 for z > 0 and 0 otherwise, with derivatives.
BetaValue beta_derivatives(double z);
double beta(double z);

struct CutoffValue {
  double value = 1.0;
  double d1 = 0.0;  // d alpha / d|p|
  double d2 = 0.0;  // d^2 alpha / d|p|^2
};

/// Radial quintic smoothstep cutoff: 1 on |p| <= R+1, 0 on |p| >= R+2.
CutoffValue alpha_radial(double R, double r);
CutoffValue alpha_R(double R, const Vec& p);

/// Gradient and Hessian in p of the radial cutoff.
Vec alpha_gradient(double R, const Vec& p);
Mat alpha_hessian(double R, const Vec& p);

struct CutoffBounds {
  double max_d1 = 0.0;          // max |alpha'|
  double max_hess_norm1 = 0.0;  // max ||alpha''||_1 over the transition shell
};

/// Sampled bounds of the cutoff on the transition shell R+1 <= |p| <= R+2.
CutoffBounds cutoff_bounds(double R, int dim);

enum class Regime {
  unmodified,  // |p| <= R
  penalized,   // R < |p| <= R+1
  transition,  // R+1 < |p| <= R+2
  tail,        // |p| > R+2
};

Regime regime_of(double R, double r);

/// Sampling density for the modified-Hamiltonian checks.
struct SamplingSpec {
  int x_points = 64;        // per dimension
  int radial_points = 64;   // radii in [0, R + p_extent]
  int directions = 16;      // unit directions; n = 1 always uses {+1, -1}
  double p_extent = 4.0;    // sample |p| up to R + p_extent
};

class ConstructionFailure : public std::runtime_error {
 public:
  ConstructionFailure(const std::string& what, double worst_eigenvalue, Vec x, Vec p)
      : std::runtime_error(what), worst_eigenvalue_(worst_eigenvalue), x_(std::move(x)),
        p_(std::move(p)) {}
  double worst_eigenvalue() const { return worst_eigenvalue_; }
  const Vec& x() const { return x_; }
  const Vec& p() const { return p_; }

 private:
  double worst_eigenvalue_;
  Vec x_;
  Vec p_;
};

/// H_R(x,p) = alpha_R(p) H(x,p) + mu_R beta(|p|^2 - R^2).
class ModifiedHamiltonian {
 public:
  ModifiedHamiltonian(HamiltonianModel base, double R, double mu, CutoffBounds bounds,
                      double gamma);

  const HamiltonianModel& base() const { return base_; }
  double R() const { return R_; }
  double mu() const { return mu_; }
  double gamma() const { return gamma_; }
  const CutoffBounds& alpha_bounds() const { return bounds_; }
  int dim() const { return base_.dim(); }

  double eval(const Vec& x, const Vec& p) const;
  Vec grad_p(const Vec& x, const Vec& p) const;
  Mat hess_p(const Vec& x, const Vec& p) const;

  /// Speed |dH_R/dp| along a tail ray of radius r (valid for r > R+2).
  double tail_speed(double r) const;

 private:
  HamiltonianModel base_;
  double R_;
  double mu_;
  CutoffBounds bounds_;
  double gamma_;
};

struct BuildOptions {
  SamplingSpec sampling{};
  int max_retries = 20;
};

/// Construct H_R. gamma_R is sampled from the actual cutoff bounds, mu_R is
/// set to max(gamma_R, 1) + 1 and doubled until every sampled p-Hessian is
/// positive definite.
ModifiedHamiltonian build_modified(const HamiltonianModel& model, double R,
                                   const BuildOptions& options = {});

struct ClaimsReport {
  double R = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
  CutoffBounds bounds{};
  std::size_t samples = 0;
  double max_gradient_fd_error = 0.0;   // relative, C^2 check
  double max_hessian_fd_error = 0.0;    // relative, C^2 check away from regime boundaries
  double max_boundary_jump = 0.0;       // relative jump of H_R, grad, Hessian across |p| = R, R+1, R+2
  double min_hessian_eigenvalue = 0.0;  // over |p| <= R + p_extent
  Vec worst_eigen_x;
  Vec worst_eigen_p;
  double min_superlinear_margin = 0.0;  // min H_R - |p|^2 over |p| in [R+2.5, R+6]
  double max_unmodified_deviation = 0.0;  // max |H_R - H| over |p| <= R

  bool c2_ok(double tol = 1e-5) const {
    return max_gradient_fd_error < tol && max_hessian_fd_error < tol && max_boundary_jump < tol;
  }
  bool convex_ok() const { return min_hessian_eigenvalue > 0.0; }
  bool superlinear_ok() const { return min_superlinear_margin >= 0.0; }
  bool fidelity_ok(double tol = 1e-12) const { return max_unmodified_deviation < tol; }
  bool passed() const { return c2_ok() && convex_ok() && superlinear_ok() && fidelity_ok(); }

  nlohmann::json to_json() const;
};

ClaimsReport verify_claims(const ModifiedHamiltonian& hr, const SamplingSpec& samples = {});

/// Sample directions on the unit sphere of R^n.
std::vector<Vec> sample_directions(int dim, int count);

/// Uniform x-grid on [0,1)^n with `per_dim` points per dimension.
std::vector<Vec> sample_points(int dim, int per_dim);

}  // namespace hjlab
