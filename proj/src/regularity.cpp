#include "hjlab/regularity.hpp"

#include "hjlab/initial_data.hpp"
#include "hjlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

namespace hjlab {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

Offset unit(int k, int sign) {
  Offset e{0, 0};
  e[k] = sign;
  return e;
}

}  // namespace

double lipschitz_estimate(const ValueFunction& u) {
  const TorusGrid& g = u.grid;
  const double inv_h = g.points();
  double lip = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int k = 0; k < g.dim(); ++k) {
      lip = std::max(lip, std::abs(u.values[g.shifted(i, unit(k, 1))] - u.values[i]) * inv_h);
    }
  }
  return lip;
}

double semiconcavity_estimate(const ValueFunction& u) {
  const TorusGrid& g = u.grid;
  const double inv_h2 = static_cast<double>(g.points()) * g.points();
  double K = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int k = 0; k < g.dim(); ++k) {
      const double d2 = u.values[g.shifted(i, unit(k, 1))] + u.values[g.shifted(i, unit(k, -1))] -
                        2.0 * u.values[i];
      K = std::max(K, d2 * inv_h2);
    }
  }
  return K;
}

bool kink_flagged(double K, const TorusGrid& grid, double slope_jump) {
  return K * grid.spacing() > slope_jump;
}

T0Detection detect_t0(const std::vector<double>& times, const std::vector<double>& values, int window,
                      double flatness) {
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("series must be nonempty with matching times");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must be increasing");
  }
  const double terminal = values.back();
  const double band = flatness * std::abs(terminal);
  std::size_t start = values.size();
  while (start > 0 && std::abs(values[start - 1] - terminal) <= band) --start;
  T0Detection det;
  if (start == values.size() || values.size() - start < static_cast<std::size_t>(std::max(window, 1))) {
    det.t0 = nan;
    det.iota = nan;
    return det;
  }
  det.detected = true;
  det.index = start;
  det.t0 = times[start];
  det.iota = *std::max_element(values.begin() + static_cast<std::ptrdiff_t>(start), values.end());
  return det;
}

namespace {

struct JobOutput {
  RunRecord record;
  std::vector<std::vector<double>> samples;  // sampled snapshots, aligned with record.series.times
  OrbitSummary orbits;
  bool has_orbits = false;
  std::string error;
};

nlohmann::json series_json(const LipSeries& s) {
  return {{"t", s.times}, {"lip", s.lip}, {"K", s.K}};
}

nlohmann::json detection_json(const T0Detection& d) {
  nlohmann::json j = {{"detected", d.detected}};
  if (d.detected) {
    j["t0"] = d.t0;
    j["iota"] = d.iota;
  } else {
    j["t0"] = "not-detected";
  }
  return j;
}

nlohmann::json run_json(const RunRecord& r) {
  return {{"R", r.R}, {"series", series_json(r.series)}, {"last_boundary_time", r.last_boundary_time}};
}

}  // namespace

nlohmann::json RegularityReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& d : data) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : d.runs) runs.push_back(run_json(r));
    per.push_back({
        {"id", d.id},
        {"name", d.name},
        {"runs", runs},
        {"combined", series_json(d.combined)},
        {"detection", detection_json(d.detection)},
        {"max_lip_after_t0_star", d.max_lip_after_t0_star},
        {"min_lip_after_t0_star", d.min_lip_after_t0_star},
        {"max_K_after_t0_star", d.max_K_after_t0_star},
        {"r_disagreement", d.r_disagreement},
        {"weak_kam_drift", d.weak_kam_drift},
        {"orbits",
         {{"count", d.orbits.count},
          {"max_normalized_energy", d.orbits.max_normalized_energy},
          {"worst_node", d.orbits.worst_node},
          {"passed", d.orbits.passed}}},
    });
  }
  nlohmann::json out = {
      {"metadata", metadata},
      {"data", per},
      {"all_detected", all_detected},
      {"iota_star", iota_star},
      {"lip_spread", lip_spread},
      {"K_star", K_star},
      {"K_finite", K_finite},
      {"max_r_disagreement", max_r_disagreement},
      {"weak_kam_drift", {{"value", weak_kam_drift}, {"t", drift_times[0]}, {"t_prime", drift_times[1]}}},
      {"c_est", c_est},
      {"c_longtime", c_longtime.c_est},
      {"c_infmax", c_infmax.c_est},
      {"c_longtime_diagnostics", c_longtime.diagnostics},
      {"c_infmax_diagnostics", c_infmax.diagnostics},
      {"max_orbit_energy", max_orbit_energy},
      {"omega_slope_bound", omega_slope_bound},
      {"calibration",
       {{"min_value", calibration.min_value},
        {"worst_node", calibration.worst_node},
        {"nodes_checked", calibration.nodes_checked},
        {"max_equality_gap", calibration.max_equality_gap}}},
      {"last_boundary_time", last_boundary_time},
      {"checks", checks},
      {"diagnostics", diagnostics},
      {"passed", passed},
  };
  out["t0_star"] = all_detected ? nlohmann::json(t0_star) : nlohmann::json("not-detected");
  return out;
}

RegularityReport run_family_experiment(const ExperimentConfig& config, int threads) {
  threads = std::max(threads, 1);
  const HamiltonianModel model(preset_from_name(config.preset), potential_from_name(config.potential),
                               config.dim);
  const TorusGrid grid(config.dim, config.N);
  const std::vector<double>& Rs = config.R_schedule;
  const Tolerances& tol = config.tolerances;

  std::vector<std::shared_ptr<const LagrangianEvaluator>> les;
  for (double R : Rs) les.push_back(std::make_shared<const LagrangianEvaluator>(build_modified(model, R)));
  const LagrangianEvaluator& le_max = *les.back();

  RegularityReport rep;
  const double v_max = config.v_max_override ? *config.v_max_override
                                             : default_velocity_window(model, model.max_potential());
  rep.c_infmax = estimate_c_infmax(le_max.hamiltonian(), grid);
  LongtimeOptions lt;
  lt.v_max = v_max;
  lt.threads = threads;
  rep.c_longtime = estimate_c_longtime(le_max, grid, config.tau, config.c_longtime_T, lt);
  rep.c_est = rep.c_longtime.c_est;

  std::vector<std::shared_ptr<const TransitionTable>> tables;
  for (const auto& le : les) tables.push_back(build_transition_table(grid, *le, config.tau, v_max, threads,
                                                                         config.subgrid_refinement));

  const std::size_t steps = static_cast<std::size_t>(std::llround(config.T / config.tau));
  const std::size_t nd = config.initial_data.size();
  const std::size_t nr = Rs.size();
  std::vector<JobOutput> jobs(nd * nr);
  const int inner = std::max(1, threads / static_cast<int>(jobs.size()));

  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    JobOutput& out = jobs[j];
    const std::size_t d = j / nr;
    const std::size_t r = j % nr;
    out.record.R = Rs[r];
    try {
      const ValueFunction phi = make_initial_datum(config.initial_data[d], grid);
      const EvolutionTrace trace = evolve(phi, les[r], tables[r], config.T, inner);
      for (std::size_t k = 0; k <= trace.steps(); ++k) {
        if (k % static_cast<std::size_t>(config.sample_every) != 0 && k != trace.steps()) continue;
        const ValueFunction& u = trace.snapshots[k];
        out.record.series.times.push_back(static_cast<double>(k) * config.tau);
        out.record.series.lip.push_back(lipschitz_estimate(u));
        out.record.series.K.push_back(semiconcavity_estimate(u));
        out.samples.push_back(u.values);
      }
      out.record.last_boundary_time = trace.last_boundary_time();
      if (r + 1 == nr) {
        out.has_orbits = true;
        OrbitSummary& s = out.orbits;
        s.passed = true;
        const double t_end = static_cast<double>(trace.steps()) * config.tau;
        const std::size_t stride = std::max<std::size_t>(1, grid.size() / static_cast<std::size_t>(config.orbit_count));
        s.max_normalized_energy = -std::numeric_limits<double>::infinity();
        for (std::size_t node = 0; node < grid.size(); node += stride) {
          const OrbitSample orbit = reconstruct_orbit(trace, node, t_end);
          const EnergyReport e = orbit_energy_check(orbit, model, rep.c_est, tol.energy_level, tol.energy_tol);
          ++s.count;
          if (e.max_normalized_energy > s.max_normalized_energy) {
            s.max_normalized_energy = e.max_normalized_energy;
            s.worst_node = node;
          }
          s.passed = s.passed && e.passed;
        }
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  rep.metadata = {
      {"preset", config.preset},
      {"potential", config.potential},
      {"dim", config.dim},
      {"N", config.N},
      {"tau", config.tau},
      {"T", static_cast<double>(steps) * config.tau},
      {"R_schedule", Rs},
      {"v_max", v_max},
      {"sample_every", config.sample_every},
  };

  std::string failure;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!jobs[j].error.empty() && failure.empty()) {
      failure = "run " + config.initial_data[j / nr].id + " at R=" + std::to_string(Rs[j % nr]) +
                " failed: " + jobs[j].error;
    }
  }
  if (!failure.empty()) {
    nlohmann::json partial = {{"metadata", rep.metadata}, {"error", failure}};
    nlohmann::json done = nlohmann::json::array();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].error.empty()) {
        nlohmann::json rj = run_json(jobs[j].record);
        rj["id"] = config.initial_data[j / nr].id;
        done.push_back(rj);
      }
    }
    partial["completed_runs"] = done;
    throw ExperimentFailure(failure, partial);
  }

  // Combined series: pointwise min over the R schedule at each sample time.
  std::vector<std::vector<std::vector<double>>> combined_values(nd);
  rep.K_finite = true;
  rep.last_boundary_time = -1.0;
  for (std::size_t d = 0; d < nd; ++d) {
    DatumReport dr;
    dr.id = config.initial_data[d].id;
    dr.name = config.initial_data[d].name;
    const JobOutput& base = jobs[d * nr];
    const std::size_t ns = base.samples.size();
    combined_values[d].resize(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      std::vector<double> m = base.samples[s];
      for (std::size_t r = 1; r < nr; ++r) {
        const auto& other = jobs[d * nr + r].samples[s];
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::min(m[i], other[i]);
      }
      const ValueFunction u(grid, m, base.record.series.times[s]);
      dr.combined.times.push_back(u.time);
      dr.combined.lip.push_back(lipschitz_estimate(u));
      dr.combined.K.push_back(semiconcavity_estimate(u));
      combined_values[d][s] = std::move(m);
    }
    for (std::size_t r = 0; r < nr; ++r) {
      const RunRecord& rec = jobs[d * nr + r].record;
      for (std::size_t s = 0; s < rec.series.times.size(); ++s) {
        if (rec.series.times[s] > 0.0 && !std::isfinite(rec.series.K[s])) rep.K_finite = false;
      }
      rep.last_boundary_time = std::max(rep.last_boundary_time, rec.last_boundary_time);
      dr.runs.push_back(rec);
    }
    dr.detection = detect_t0(dr.combined.times, dr.combined.lip, tol.window, tol.flatness);
    dr.orbits = jobs[d * nr + nr - 1].orbits;
    rep.data.push_back(std::move(dr));
  }

  rep.all_detected = std::all_of(rep.data.begin(), rep.data.end(),
                                 [](const DatumReport& d) { return d.detection.detected; });
  rep.t0_star = 0.0;
  for (const auto& d : rep.data) {
    if (d.detection.detected) rep.t0_star = std::max(rep.t0_star, d.detection.t0);
  }

  double global_min = std::numeric_limits<double>::infinity();
  rep.iota_star = 0.0;
  rep.K_star = 0.0;
  rep.max_orbit_energy = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < nd; ++d) {
    DatumReport& dr = rep.data[d];
    const auto& samples_max = jobs[d * nr + nr - 1].samples;
    dr.min_lip_after_t0_star = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < dr.combined.times.size(); ++s) {
      if (dr.combined.times[s] < rep.t0_star) continue;
      dr.max_lip_after_t0_star = std::max(dr.max_lip_after_t0_star, dr.combined.lip[s]);
      dr.min_lip_after_t0_star = std::min(dr.min_lip_after_t0_star, dr.combined.lip[s]);
      dr.max_K_after_t0_star = std::max(dr.max_K_after_t0_star, dr.combined.K[s]);
      const auto& m = combined_values[d][s];
      for (std::size_t i = 0; i < m.size(); ++i) {
        dr.r_disagreement = std::max(dr.r_disagreement, std::abs(m[i] - samples_max[s][i]));
      }
    }
    const std::size_t ns = dr.combined.times.size();
    if (ns >= 2) {
      const double t = dr.combined.times[ns - 1];
      const double tp = dr.combined.times[ns - 2];
      rep.drift_times[0] = t;
      rep.drift_times[1] = tp;
      const auto& a = combined_values[d][ns - 1];
      const auto& b = combined_values[d][ns - 2];
      for (std::size_t i = 0; i < a.size(); ++i) {
        dr.weak_kam_drift = std::max(dr.weak_kam_drift, std::abs(a[i] + rep.c_est * t - b[i] - rep.c_est * tp));
      }
    }
    rep.iota_star = std::max(rep.iota_star, dr.max_lip_after_t0_star);
    global_min = std::min(global_min, dr.min_lip_after_t0_star);
    rep.K_star = std::max(rep.K_star, dr.max_K_after_t0_star);
    rep.max_r_disagreement = std::max(rep.max_r_disagreement, dr.r_disagreement);
    rep.weak_kam_drift = std::max(rep.weak_kam_drift, dr.weak_kam_drift);
    rep.max_orbit_energy = std::max(rep.max_orbit_energy, dr.orbits.max_normalized_energy);
  }
  rep.lip_spread = global_min > 0.0 ? rep.iota_star / global_min
                                     : (rep.iota_star == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());

  {
    const auto& last = combined_values.front().back();
    const double t_end = rep.data.front().combined.times.back();
    std::vector<double> ubar(last);
    for (double& v : ubar) v += rep.c_est * t_end;
    rep.calibration = calibration_check(ValueFunction(grid, ubar, t_end), le_max, rep.c_est);
  }

  const bool c_ok = std::abs(rep.c_longtime.c_est - rep.c_infmax.c_est) <= tol.c_agreement;
  const bool spread_ok = rep.all_detected && rep.lip_spread <= tol.lip_agreement;
  const bool r_ok = rep.max_r_disagreement < tol.r_agreement;
  const bool orbits_ok = std::all_of(rep.data.begin(), rep.data.end(),
                                     [](const DatumReport& d) { return d.orbits.passed; });
  const bool calibration_ok = rep.calibration.min_value >= -tol.calibration;
  const bool window_ok = !rep.all_detected || rep.last_boundary_time < rep.t0_star;
  rep.omega_slope_bound = model.coercivity_radius(rep.c_est + tol.energy_level);
  rep.checks = {
      {"t0_detected", rep.all_detected},
      {"lip_agreement", spread_ok},
      {"r_agreement", r_ok},
      {"c_agreement", c_ok},
      {"K_finite", rep.K_finite},
      {"velocity_window", window_ok},
  };
  rep.diagnostics = {
      {"orbit_energy", orbits_ok},
      {"calibration", calibration_ok},
      {"iota_within_omega_slope", rep.iota_star <= rep.omega_slope_bound},
  };
  rep.passed = rep.all_detected && spread_ok && r_ok && c_ok && rep.K_finite && window_ok;
  return rep;
}

}  // namespace hjlab
