#include "hjlab/initial_data.hpp"
#include "hjlab/io.hpp"
#include "hjlab/regularity.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hjlab;

namespace {

ValueFunction sample(int N, double (*f)(double)) {
  const TorusGrid g(1, N);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.point(i)[0]);
  return ValueFunction(g, v);
}

InitialDatumSpec datum(const std::string& name) {
  InitialDatumSpec d;
  d.name = d.id = name;
  if (name == "random-nodal") d.seed = 17;
  return d;
}

ExperimentConfig small_pendulum(double T) {
  ExperimentConfig cfg;
  cfg.N = 128;
  cfg.tau = 0.02;
  cfg.T = T;
  cfg.sample_every = 5;
  cfg.c_longtime_T = 20.0;
  cfg.tolerances.window = 10;
  cfg.initial_data = {datum("sqrt-cusp"), datum("holder"), datum("cosine")};
  return cfg;
}

}  // namespace

TEST_CASE("lipschitz estimate examples") {
  CHECK(lipschitz_estimate(ValueFunction::constant(TorusGrid(1, 16), 3.0)) == 0.0);
  CHECK(lipschitz_estimate(sample(8, [](double x) { return std::abs(x - 0.5); })) == doctest::Approx(1.0).epsilon(1e-14));
  const double cusp = lipschitz_estimate(sample(1024, [](double x) { return std::sqrt(std::min(x, 1.0 - x)); }));
  CHECK(cusp == doctest::Approx(32.0).epsilon(1.0 / 32.0));
}

TEST_CASE("semiconcavity estimate examples") {
  CHECK(semiconcavity_estimate(ValueFunction::constant(TorusGrid(1, 16), -1.0)) == 0.0);
  const double K = semiconcavity_estimate(sample(512, [](double x) { return std::cos(two_pi * x); }));
  CHECK(K == doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-2));
  CHECK_FALSE(kink_flagged(K, TorusGrid(1, 512)));
  // Upward (convex) kink: second difference ~ slope jump / h.
  for (int N : {64, 256, 1024}) {
    const ValueFunction hat = sample(N, [](double x) { return std::abs(x - 0.5); });
    const double Kh = semiconcavity_estimate(hat);
    CHECK(Kh == doctest::Approx(2.0 * N).epsilon(1e-9));
    CHECK(kink_flagged(Kh, hat.grid));
  }
  // A single concave kink keeps the smooth bound pi^2.
  const ValueFunction cap = sample(256, [](double x) { return -std::abs(std::sin(M_PI * (x - 0.5))); });
  CHECK(semiconcavity_estimate(cap) <= M_PI * M_PI);
  CHECK_FALSE(kink_flagged(semiconcavity_estimate(cap), cap.grid));
}

TEST_CASE("detect_t0 examples") {
  const T0Detection c = detect_t0({0, 1, 2, 3}, {2.5, 2.5, 2.5, 2.5}, 3, 0.05);
  CHECK(c.detected);
  CHECK(c.t0 == 0.0);
  CHECK(c.iota == 2.5);

  const T0Detection d = detect_t0({0, 1, 2, 3, 4, 5, 6}, {10, 5, 2, 1.01, 1.0, 1.0, 1.0}, 3, 0.05);
  CHECK(d.detected);
  CHECK(d.index == 3);
  CHECK(d.t0 == 3.0);
  CHECK(d.iota == 1.01);

  const T0Detection inc = detect_t0({0, 1, 2, 3, 4, 5}, {1, 2, 3, 4, 5, 6}, 3, 0.05);
  CHECK_FALSE(inc.detected);
  CHECK(std::isnan(inc.t0));

  CHECK_THROWS_AS(detect_t0({}, {}, 3, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(detect_t0({0, 0}, {1, 1}, 1, 0.05), std::invalid_argument);
}

TEST_CASE("detect_t0 is monotone in the band width") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t, v;
    for (int k = 0; k < 40; ++k) {
      t.push_back(k);
      v.push_back(1.0 + std::exp(-0.2 * k) * 3.0 * u(rng));
    }
    double prev_t0 = std::numeric_limits<double>::infinity();
    bool prev_detected = false;
    for (double flat : {0.01, 0.02, 0.05, 0.1, 0.3}) {
      const T0Detection det = detect_t0(t, v, 5, flat);
      if (prev_detected) {
        REQUIRE(det.detected);
        CHECK(det.t0 <= prev_t0);
      }
      if (det.detected) {
        prev_t0 = det.t0;
        prev_detected = true;
      }
    }
  }
}

TEST_CASE("initial data presets") {
  const TorusGrid g(1, 256);
  const ValueFunction cusp = make_initial_datum(datum("sqrt-cusp"), g);
  CHECK(cusp.min() <= std::sqrt(0.5 / 256.0));
  CHECK(cusp.max() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-2));
  const ValueFunction hold = make_initial_datum(datum("holder"), g);
  CHECK(hold.max() == doctest::Approx(std::pow(0.5, 1.0 / 3.0)).epsilon(1e-2));
  InitialDatumSpec saw = datum("sawtooth");
  saw.teeth = 2;
  CHECK(lipschitz_estimate(make_initial_datum(saw, g)) == doctest::Approx(4.0).epsilon(1e-12));

  // random-nodal: fixed knots, so refinement samples the same function.
  const InitialDatumSpec rn = datum("random-nodal");
  const ValueFunction coarse = make_initial_datum(rn, TorusGrid(1, 128));
  const ValueFunction fine = make_initial_datum(rn, TorusGrid(1, 512));
  for (std::size_t i = 0; i < 128; ++i) CHECK(coarse.values[i] == fine.values[4 * i]);
  CHECK(coarse.max() <= 1.0);
  CHECK(coarse.min() >= -1.0);
  InitialDatumSpec other = rn;
  other.seed = 18;
  CHECK(make_initial_datum(other, TorusGrid(1, 128)).values != coarse.values);
  InitialDatumSpec unseeded = rn;
  unseeded.seed.reset();
  CHECK_THROWS_AS(make_initial_datum(unseeded, g), std::invalid_argument);

  const ValueFunction two = make_initial_datum(datum("random-nodal"), TorusGrid(2, 32));
  CHECK(two.values.size() == 1024);
  CHECK(std::isfinite(two.max()));
}

TEST_CASE("family of constants on the free particle") {
  ExperimentConfig cfg;
  cfg.potential = "zero";
  cfg.N = 64;
  cfg.tau = 0.02;
  cfg.T = 1.0;
  cfg.sample_every = 5;
  cfg.c_longtime_T = 2.0;
  cfg.tolerances.window = 3;
  InitialDatumSpec a = datum("constant");
  InitialDatumSpec b = datum("constant");
  b.id = "five";
  b.value = 5.0;
  cfg.initial_data = {a, b};
  const RegularityReport rep = run_family_experiment(cfg, 2);
  REQUIRE(rep.data.size() == 2);
  for (const auto& d : rep.data) {
    for (double lip : d.combined.lip) CHECK(lip == 0.0);
    for (const auto& r : d.runs) {
      for (double lip : r.series.lip) CHECK(lip == 0.0);
    }
  }
  CHECK(rep.all_detected);
  CHECK(rep.t0_star == 0.0);
  CHECK(rep.iota_star == 0.0);
  CHECK(rep.passed);
}

TEST_CASE("pendulum family: report invariants") {
  const ExperimentConfig cfg = small_pendulum(8.0);
  const RegularityReport rep = run_family_experiment(cfg, 1);
  CHECK(rep.all_detected);
  CHECK(rep.t0_star <= cfg.T);
  for (const auto& d : rep.data) {
    CHECK(d.detection.t0 <= cfg.T);
    for (std::size_t s = 0; s < d.combined.times.size(); ++s) {
      if (d.combined.times[s] > 0.0) CHECK(std::isfinite(d.combined.lip[s]));
      if (d.combined.times[s] >= rep.t0_star) CHECK(d.combined.lip[s] <= rep.iota_star);
    }
    // Regularization: the cusp's initial Lipschitz estimate is large, later values are not.
    CHECK(d.runs.front().series.times.front() == 0.0);
  }
  CHECK(rep.data[0].combined.lip.front() > 5.0);
  CHECK(rep.data[0].combined.lip.back() < 3.0);
  CHECK(rep.K_finite);
  CHECK(rep.max_r_disagreement < 1e-6);
  // Omega = {p^2/2 + cos 2 pi x - 1 <= 1}: |p| <= sqrt(6).
  CHECK(rep.omega_slope_bound == doctest::Approx(std::sqrt(6.0)).epsilon(1e-6));
  CHECK(rep.diagnostics.at("iota_within_omega_slope") == (rep.iota_star <= rep.omega_slope_bound));
  CHECK(std::abs(rep.c_longtime.c_est - rep.c_infmax.c_est) < 5e-2);
  const auto j = rep.to_json();
  CHECK(j.at("data").size() == 3);
  CHECK(j.at("metadata").at("N") == 128);

  const std::string csv = lip_series_csv(rep);
  CHECK(csv.rfind("datum_id,R,t,lip,K\n", 0) == 0);
  CHECK(csv.find("\nsqrt-cusp,min,") != std::string::npos);
  CHECK(csv.find("\ncosine,8,") != std::string::npos);
}

TEST_CASE("weak-KAM drift decreases with the horizon") {
  const RegularityReport early = run_family_experiment(small_pendulum(2.0), 1);
  const RegularityReport late = run_family_experiment(small_pendulum(12.0), 1);
  CHECK(late.weak_kam_drift <= early.weak_kam_drift);
}

TEST_CASE("report does not depend on the worker count") {
  const ExperimentConfig cfg = small_pendulum(4.0);
  const std::string a = run_family_experiment(cfg, 1).to_json().dump();
  const std::string b = run_family_experiment(cfg, 4).to_json().dump();
  CHECK(a == b);
}

TEST_CASE("a failing sub-run aborts with partial results") {
  ExperimentConfig cfg = small_pendulum(1.0);
  InitialDatumSpec bad = datum("random-nodal");
  bad.seed.reset();
  cfg.initial_data.push_back(bad);
  try {
    run_family_experiment(cfg, 2);
    FAIL("expected ExperimentFailure");
  } catch (const ExperimentFailure& e) {
    CHECK(std::string(e.what()).find("random-nodal") != std::string::npos);
    CHECK(e.partial().at("completed_runs").size() == 6);
  }
}
