#include "hjlab/legendre.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hjlab;

namespace {

// Dense-grid conjugate in one dimension, refined by golden-section search.
double grid_conjugate(const ModifiedHamiltonian& hr, double x, double v, double p_lo, double p_hi) {
  const int n = 20001;
  double best_p = p_lo;
  double best = -1e300;
  for (int i = 0; i < n; ++i) {
    const double p = p_lo + (p_hi - p_lo) * i / (n - 1);
    const double val = p * v - hr.eval(make_vec(x), make_vec(p));
    if (val > best) {
      best = val;
      best_p = p;
    }
  }
  const double step = (p_hi - p_lo) / (n - 1);
  double a = best_p - step;
  double b = best_p + step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double p) { return p * v - hr.eval(make_vec(x), make_vec(p)); };
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (f(c) > f(d)) b = d; else a = c;
  }
  return f(0.5 * (a + b));
}

LagrangianEvaluator make(Preset preset, Potential pot, double R, int dim = 1) {
  return LagrangianEvaluator(build_modified({preset, pot, dim}, R));
}

}  // namespace

TEST_CASE("legendre examples") {
  const LagrangianEvaluator free = make(Preset::mechanical, Potential::zero, 20.0);
  const ConjugateResult a = free.legendre(make_vec(0.3), make_vec(1.0));
  CHECK(a.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.p_star[0] == doctest::Approx(1.0).epsilon(1e-10));

  const LagrangianEvaluator pend = make(Preset::mechanical, Potential::cosine, 8.0);
  const ConjugateResult b = pend.legendre(make_vec(0.0), make_vec(0.0));
  CHECK(b.value == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(b.p_star[0]) < 1e-12);

  const LagrangianEvaluator rel = make(Preset::coercive_nonsuperlinear, Potential::zero, 8.0);
  const double L = rel.lagrangian(make_vec(0.0), make_vec(0.6));
  CHECK(L == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(L == doctest::Approx(grid_conjugate(rel.hamiltonian(), 0.0, 0.6, -10.0, 10.0)).epsilon(1e-9));
}

TEST_CASE("analytic conjugates: quadratic and relativistic") {
  const double R = 4.0;
  const LagrangianEvaluator quad = make(Preset::mechanical, Potential::cosine, R);
  const LagrangianEvaluator rel = make(Preset::coercive_nonsuperlinear, Potential::cosine, R);
  const double v_rel_max = R / std::sqrt(1.0 + R * R);  // image of |p| <= R
  for (double x = 0.0; x < 1.0; x += 0.0625) {
    const double V = std::cos(two_pi * x);
    for (double v = -R; v <= R; v += 0.125) {
      CHECK(std::abs(quad.lagrangian(make_vec(x), make_vec(v)) - (0.5 * v * v - V)) < 1e-6);
    }
    for (double v = -v_rel_max; v <= v_rel_max; v += v_rel_max / 16.0) {
      CHECK(std::abs(rel.lagrangian(make_vec(x), make_vec(v)) - (1.0 - std::sqrt(1.0 - v * v) - V)) < 1e-6);
    }
  }
}

TEST_CASE("conjugate matches a dense-grid oracle beyond the unmodified region") {
  const LagrangianEvaluator rel = make(Preset::coercive_nonsuperlinear, Potential::cosine, 2.0);
  for (double v : {0.95, 0.99, 1.5, 5.0, 40.0}) {
    const double oracle = grid_conjugate(rel.hamiltonian(), 0.2, v, -6.0, 6.0);
    CHECK(rel.lagrangian(make_vec(0.2), make_vec(v)) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("velocity_map examples") {
  const ModifiedHamiltonian free = build_modified({Preset::mechanical, Potential::zero, 1}, 5.0);
  CHECK(velocity_map(free, make_vec(0.1), make_vec(2.0))[0] == doctest::Approx(2.0));
  const ModifiedHamiltonian rel = build_modified({Preset::coercive_nonsuperlinear, Potential::cosine, 1}, 5.0);
  CHECK(velocity_map(rel, make_vec(0.4), make_vec(0.0))[0] == 0.0);
  const ModifiedHamiltonian small = build_modified({Preset::mechanical, Potential::zero, 1}, 1.5);
  const double p = 4.0;
  const double expected = small.mu() * beta_derivatives(p * p - 2.25).d1 * 2.0 * p;
  CHECK(velocity_map(small, make_vec(0.0), make_vec(p))[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("Fenchel-Young, inverse maps and lower bounds") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Preset preset : {Preset::mechanical, Preset::coercive_nonsuperlinear}) {
    const LagrangianEvaluator le = make(preset, Potential::cosine_2d, 3.0, 2);
    const ModifiedHamiltonian& hr = le.hamiltonian();
    for (int i = 0; i < 300; ++i) {
      const Vec x = make_vec(unit(rng), unit(rng));
      const double speed = 6.0 * unit(rng) * unit(rng);
      const double ang = two_pi * unit(rng);
      const Vec v = make_vec(speed * std::cos(ang), speed * std::sin(ang));
      const ConjugateResult res = le.legendre(x, v);
      const double scale = std::max(1.0, std::abs(res.value));
      CHECK(std::abs(res.value + hr.eval(x, res.p_star) - res.p_star.dot(v)) <= 1e-8 * scale);
      CHECK((velocity_map(hr, x, res.p_star) - v).norm() <= 1e-6 * std::max(1.0, v.norm()));
      CHECK(res.value >= -hr.eval(x, Vec::Zero(2)) - 1e-12);
      for (int k = 0; k < 5; ++k) {
        const Vec p = make_vec(8.0 * (unit(rng) - 0.5), 8.0 * (unit(rng) - 0.5));
        CHECK(res.value + hr.eval(x, p) >= p.dot(v) - 1e-9 * scale);
      }
      // Midpoint convexity along a random segment.
      const Vec w = make_vec(unit(rng) - 0.5, unit(rng) - 0.5);
      const double mid = le.lagrangian(x, v);
      const double ends = 0.5 * (le.lagrangian(x, v + w) + le.lagrangian(x, v - w));
      CHECK(mid <= ends + 1e-9 * scale);
    }
  }
}

TEST_CASE("tail regime is solved on the explicit quartic") {
  const LagrangianEvaluator le = make(Preset::mechanical, Potential::cosine, 2.0);
  const ModifiedHamiltonian& hr = le.hamiltonian();
  const double v = 3.0 * hr.tail_speed(hr.R() + 2.0);
  const ConjugateResult res = le.legendre(make_vec(0.3), make_vec(v));
  CHECK(res.tail);
  CHECK(std::abs(res.p_star[0]) > hr.R() + 2.0);
  CHECK(velocity_map(hr, make_vec(0.3), res.p_star)[0] == doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("biconjugate round trip") {
  const LagrangianEvaluator free = make(Preset::mechanical, Potential::zero, 4.0);
  const BiconjugateReport a = biconjugate_check(free, 10, 50);
  CHECK(a.samples >= 1000);
  CHECK(a.max_error < 1e-6);
  const LagrangianEvaluator rel = make(Preset::coercive_nonsuperlinear, Potential::cosine, 4.0);
  const BiconjugateReport b = biconjugate_check(rel, 10, 50);
  CHECK(b.samples >= 1000);
  CHECK(b.max_error < 1e-5);
}

TEST_CASE("Lagrangian table layout is row-major over x then v") {
  const LagrangianEvaluator le = make(Preset::mechanical, Potential::cosine, 4.0);
  const auto rows = tabulate_lagrangian(le, 4, 2.0, 5);
  REQUIRE(rows.size() == 20);
  CHECK(rows[0][0].get<double>() == 0.0);
  CHECK(rows[0][1].get<double>() == -2.0);
  CHECK(rows[1][0].get<double>() == 0.0);
  CHECK(rows[1][1].get<double>() == -1.0);
  CHECK(rows[5][0].get<double>() == 0.25);
  CHECK(rows[7][2].get<double>() == doctest::Approx(le.lagrangian(make_vec(0.25), make_vec(0.0))));
}
