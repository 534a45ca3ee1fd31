#pragma once

#include "hjlab/hamiltonian.hpp"

#include <filesystem>
#include <stdexcept>

namespace hjlab {

struct ConjugateOptions {
  double gradient_tol = 1e-10;  // stop when |dH_R/dp(p) - v| falls below this
  int max_iterations = 200;
  int fallback_radial_points = 400;
  int fallback_directions = 64;
};

struct ConjugateResult {
  double value = 0.0;  // L_R(x, v)
  Vec p_star;          // maximizing momentum
  int iterations = 0;
  bool tail = false;   // solved in the explicit quartic tail
};

class ConjugateFailure : public std::runtime_error {
 public:
  ConjugateFailure(const std::string& what, double best_value, Vec best_p)
      : std::runtime_error(what), best_value_(best_value), best_p_(std::move(best_p)) {}
  double best_value() const { return best_value_; }
  const Vec& best_p() const { return best_p_; }

 private:
  double best_value_;
  Vec best_p_;
};

/// L_R(x,v) = sup_p [<p,v> - H_R(x,p)] with its maximizing momentum.
class LagrangianEvaluator {
 public:
  explicit LagrangianEvaluator(ModifiedHamiltonian hr, ConjugateOptions options = {});

  const ModifiedHamiltonian& hamiltonian() const { return hr_; }
  const ConjugateOptions& options() const { return options_; }

  ConjugateResult legendre(const Vec& x, const Vec& v) const;
  double lagrangian(const Vec& x, const Vec& v) const { return legendre(x, v).value; }

 private:
  ConjugateResult solve_tail(const Vec& v) const;
  ConjugateResult solve_newton(const Vec& x, const Vec& v, Vec p) const;
  Vec grid_guess(const Vec& x, const Vec& v) const;

  ModifiedHamiltonian hr_;
  ConjugateOptions options_;
  double tail_threshold_;  // |dH_R/dp| at |p| = R+2 on the radial tail
};

/// dH_R/dp(x, p).
Vec velocity_map(const ModifiedHamiltonian& hr, const Vec& x, const Vec& p);

struct BiconjugateReport {
  std::size_t samples = 0;
  double max_error = 0.0;  // max |sup_v [<p,v> - L_R(x,v)] - H_R(x,p)|
  Vec worst_x;
  Vec worst_p;
  nlohmann::json to_json() const;
};

/// Recomputes H_R from L_R on |p| <= R+2 by an independent ascent in v.
BiconjugateReport biconjugate_check(const LagrangianEvaluator& le, int x_points, int p_points,
                                    int directions = 8);

/// Tabulate L_R on x-grid by v-grid and write it as a JSON array of
/// [x..., v..., L] rows, row-major over x then v.
nlohmann::json tabulate_lagrangian(const LagrangianEvaluator& le, int x_points,
                                   double v_extent, int v_points);
void write_lagrangian_table(const std::filesystem::path& path, const LagrangianEvaluator& le,
                            int x_points, double v_extent, int v_points);

}  // namespace hjlab
