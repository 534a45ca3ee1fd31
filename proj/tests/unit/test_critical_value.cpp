#include "hjlab/critical_value.hpp"

#include "sublevel_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace hjlab;
using hjlab::testing::sublevel_emptiness_oracle;

TEST_CASE("infmax reaches the sublevel-emptiness oracle from a poor start") {
  const ModifiedHamiltonian hr = build_modified({Preset::mechanical, Potential::cosine, 1}, 8.0);
  const TorusGrid g(1, 128);
  const double oracle = sublevel_emptiness_oracle(hr, 128);
  CHECK(oracle == doctest::Approx(1.0).epsilon(1e-9));
  InfmaxOptions opt;
  for (std::size_t i = 0; i < g.size(); ++i) opt.initial.push_back(0.3 * std::sin(two_pi * g.point(i)[0]) + 0.1 * std::cos(6 * M_PI * g.point(i)[0]));
  const CriticalValueEstimate est = estimate_c_infmax(hr, g, opt);
  CHECK(est.history.front() > oracle + 0.1);
  CHECK(est.c_est >= oracle - 1e-9);
  CHECK(est.c_est <= oracle + 2e-2);
  for (std::size_t k = 1; k < est.history.size(); ++k) CHECK(est.history[k] <= est.history[k - 1]);
  CHECK(infmax_objective(hr, g, opt.initial) == est.history.front());
}

TEST_CASE("longtime and infmax agree on both presets") {
  const TorusGrid g(1, 512);
  for (Preset preset : {Preset::mechanical, Preset::coercive_nonsuperlinear}) {
    const HamiltonianModel m(preset, Potential::cosine, 1);
    const LagrangianEvaluator le(build_modified(m, 8.0));
    const CriticalValueEstimate lt = estimate_c_longtime(le, g, 0.01, 50.0);
    const CriticalValueEstimate im = estimate_c_infmax(le.hamiltonian(), g);
    CHECK(std::abs(lt.c_est - im.c_est) < 5e-2);
    CHECK(lt.c_est == doctest::Approx(1.0).epsilon(2e-2));
    CHECK_FALSE(lt.unreliable);
    // Certificate u = 0: c <= max_x H(x, 0).
    CHECK(lt.c_est <= m.max_potential() + 1e-9);
    CHECK(im.c_est <= m.max_potential() + 1e-9);
    CHECK(lt.to_json(m).at("method") == "longtime");
  }
}

TEST_CASE("zero potential gives zero critical value") {
  const TorusGrid g(1, 256);
  const LagrangianEvaluator le(build_modified({Preset::mechanical, Potential::zero, 1}, 4.0));
  CHECK(std::abs(estimate_c_longtime(le, g, 0.01, 20.0).c_est) < 1e-3);
  CHECK(std::abs(estimate_c_infmax(le.hamiltonian(), g).c_est) < 1e-3);
}

TEST_CASE("two-dimensional critical value equals max V") {
  const TorusGrid g(2, 32);
  const LagrangianEvaluator le(build_modified({Preset::mechanical, Potential::cosine_2d, 2}, 4.0));
  const CriticalValueEstimate im = estimate_c_infmax(le.hamiltonian(), g);
  CHECK(im.c_est == doctest::Approx(1.5).epsilon(1e-9));
  const CriticalValueEstimate lt = estimate_c_longtime(le, g, 0.02, 10.0);
  CHECK(lt.c_est == doctest::Approx(1.5).epsilon(2e-2));
}

TEST_CASE("c_R stability over the R schedule") {
  const HamiltonianModel m(Preset::mechanical, Potential::cosine, 1);
  const TorusGrid g(1, 128);
  const StabilityReport rep = check_cR_stability(m, {2.0, 4.0, 8.0, 16.0}, g);
  CHECK(rep.passed);
  CHECK(rep.rows.size() == 4);
  for (const auto& a : rep.rows) {
    for (const auto& b : rep.rows) {
      if (a.R >= 4.0 && b.R >= 4.0) CHECK(std::abs(a.c_infmax - b.c_infmax) < 1e-2);
    }
  }
  const StabilityReport single = check_cR_stability(m, {4.0}, g);
  CHECK(single.passed);
  CHECK_THROWS_AS(check_cR_stability(m, {}, g), std::invalid_argument);
  CHECK_THROWS_AS(check_cR_stability(m, {8.0, 4.0}, g), std::invalid_argument);
}

TEST_CASE("infmax descends in two dimensions") {
  const ModifiedHamiltonian hr = build_modified({Preset::mechanical, Potential::cosine_2d, 2}, 4.0);
  const TorusGrid g(2, 24);
  InfmaxOptions opt;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.point(i);
    opt.initial.push_back(0.2 * std::sin(two_pi * x[0]) * std::cos(two_pi * x[1]) + 0.1 * std::sin(two_pi * x[1]));
  }
  const CriticalValueEstimate est = estimate_c_infmax(hr, g, opt);
  CHECK(est.history.front() > 1.7);
  CHECK(est.c_est == doctest::Approx(1.5).epsilon(2e-2));
}
