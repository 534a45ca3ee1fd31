#include "hjlab/cli.hpp"

#include "hjlab/config.hpp"
#include "hjlab/critical_value.hpp"
#include "hjlab/initial_data.hpp"
#include "hjlab/io.hpp"
#include "hjlab/regularity.hpp"

#include <cmath>
#include <limits>

namespace hjlab {

namespace {

using json = nlohmann::json;

std::string_view name_of(Subcommand c) {
  switch (c) {
    case Subcommand::verify_hr: return "verify-hr";
    case Subcommand::critical_value: return "critical-value";
    case Subcommand::evolve: return "evolve";
    case Subcommand::regularity_experiment: return "regularity-experiment";
  }
  return "unknown";
}

HamiltonianModel model_of(const ExperimentConfig& cfg) {
  return HamiltonianModel(preset_from_name(cfg.preset), potential_from_name(cfg.potential), cfg.dim);
}

double certificate_level(const HamiltonianModel& model, const TorusGrid& grid) {
  double c = -std::numeric_limits<double>::infinity();
  const Vec zero = Vec::Zero(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) c = std::max(c, model.eval(grid.point(i), zero));
  return c;
}

double velocity_window(const ExperimentConfig& cfg, const HamiltonianModel& model) {
  return cfg.v_max_override ? *cfg.v_max_override : default_velocity_window(model, model.max_potential());
}

bool verify_hr(const ExperimentConfig& cfg, OutputDirectory& out, std::ostream& log) {
  const HamiltonianModel model = model_of(cfg);
  json rows = json::array();
  bool ok = true;
  for (double R : cfg.R_schedule) {
    json row = {{"R", R}};
    try {
      const ModifiedHamiltonian hr = build_modified(model, R);
      const ClaimsReport claims = verify_claims(hr);
      const LagrangianEvaluator le(hr);
      const BiconjugateReport bic = biconjugate_check(le, cfg.dim == 1 ? 16 : 6, 16);
      const bool row_ok = claims.passed() && bic.max_error < 1e-5;
      row["claims"] = claims.to_json();
      row["biconjugate"] = bic.to_json();
      row["passed"] = row_ok;
      ok = ok && row_ok;
      log << "verify-hr: R=" << R << " min eigenvalue " << claims.min_hessian_eigenvalue
          << " biconjugate error " << bic.max_error << (row_ok ? " ok" : " FAILED") << "\n";
      if (cfg.dim == 1) {
        const std::string name = "lagrangian_R" + format_double(R) + ".json";
        out.write_json(name, tabulate_lagrangian(le, 32, 4.0, 81));
      }
    } catch (const ConstructionFailure& e) {
      row["passed"] = false;
      row["construction_failure"] = {{"message", e.what()},
                                     {"worst_eigenvalue", e.worst_eigenvalue()},
                                     {"x", std::vector<double>(e.x().begin(), e.x().end())},
                                     {"p", std::vector<double>(e.p().begin(), e.p().end())}};
      ok = false;
      log << "verify-hr: R=" << R << " construction failed: " << e.what() << "\n";
    }
    rows.push_back(row);
  }
  out.write_json("verification.json", {{"preset", cfg.preset},
                                       {"potential", cfg.potential},
                                       {"dim", cfg.dim},
                                       {"rows", rows},
                                       {"passed", ok}});
  return ok;
}

bool critical_value(const ExperimentConfig& cfg, OutputDirectory& out, int threads, std::ostream& log) {
  const HamiltonianModel model = model_of(cfg);
  const TorusGrid grid(cfg.dim, cfg.N);
  const double R = cfg.R_schedule.back();
  const LagrangianEvaluator le(build_modified(model, R));
  LongtimeOptions lt;
  lt.v_max = velocity_window(cfg, model);
  lt.threads = threads;
  const CriticalValueEstimate longtime = estimate_c_longtime(le, grid, cfg.tau, cfg.c_longtime_T, lt);
  const CriticalValueEstimate infmax = estimate_c_infmax(le.hamiltonian(), grid);
  const double certificate = certificate_level(model, grid);
  const double gap = std::abs(longtime.c_est - infmax.c_est);
  const bool agree = gap <= cfg.tolerances.c_agreement;
  const bool bounded = longtime.c_est <= certificate + 1e-9 && infmax.c_est <= certificate + 1e-9;

  json record = longtime.to_json(model);
  record["diagnostics"]["infmax"] = infmax.to_json(model);
  record["diagnostics"]["gap"] = gap;
  record["diagnostics"]["agreement"] = agree;
  record["diagnostics"]["certificate_max_H_x_0"] = certificate;
  record["diagnostics"]["below_certificate"] = bounded;
  out.write_json("critical_value.json", record);

  StabilityOptions so;
  so.tolerance = cfg.tolerances.r_stability;
  so.threads = threads;
  const StabilityReport stab = check_cR_stability(model, cfg.R_schedule, grid, so);
  out.write_json("cR_stability.json", stab.to_json());

  log << "critical-value: longtime " << longtime.c_est << ", infmax " << infmax.c_est << ", gap " << gap
      << (agree ? "" : " (DISAGREE)") << "\n";
  if (longtime.unreliable) log << "critical-value: velocity window boundary hit late in the run\n";
  return agree && bounded && !longtime.unreliable && stab.passed;
}

std::string trace_csv(const EvolutionTrace& trace, int sample_every) {
  std::string s = "step,node_index,value\n";
  for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
    if (k % static_cast<std::size_t>(sample_every) != 0 && k + 1 != trace.snapshots.size()) continue;
    const auto& v = trace.snapshots[k].values;
    const std::string step = std::to_string(k) + ",";
    for (std::size_t i = 0; i < v.size(); ++i) s += step + std::to_string(i) + "," + format_double(v[i]) + "\n";
  }
  return s;
}

std::string orbit_csv(const OrbitSample& orbit, int dim) {
  static const char* axis[] = {"x", "y"};
  std::string s = "k";
  for (const char* prefix : {"position_", "velocity_", "momentum_"}) {
    for (int d = 0; d < dim; ++d) s += std::string(",") + prefix + axis[d];
  }
  s += ",energy\n";
  for (std::size_t k = 0; k < orbit.positions.size(); ++k) {
    s += std::to_string(k);
    for (int d = 0; d < dim; ++d) s += "," + format_double(orbit.positions[k][d]);
    const bool has_segment = k < orbit.velocities.size();
    for (int d = 0; d < dim; ++d) s += "," + (has_segment ? format_double(orbit.velocities[k][d]) : std::string());
    for (int d = 0; d < dim; ++d) s += "," + (has_segment ? format_double(orbit.momenta[k][d]) : std::string());
    s += "," + (k < orbit.energies.size() ? format_double(orbit.energies[k]) : std::string()) + "\n";
  }
  return s;
}

bool evolve_command(const ExperimentConfig& cfg, OutputDirectory& out, int threads, std::ostream& log) {
  const HamiltonianModel model = model_of(cfg);
  const TorusGrid grid(cfg.dim, cfg.N);
  const double R = cfg.R_schedule.back();
  const auto le = std::make_shared<const LagrangianEvaluator>(build_modified(model, R));
  const double v_max = velocity_window(cfg, model);
  const auto table = build_transition_table(grid, *le, cfg.tau, v_max, threads, cfg.subgrid_refinement);
  const InitialDatumSpec& datum = cfg.initial_data.front();
  const EvolutionTrace trace = evolve(make_initial_datum(datum, grid), le, table, cfg.T, threads);
  for (const auto& w : trace.warnings) log << "evolve: " << w << "\n";

  const double t_end = static_cast<double>(trace.steps()) * cfg.tau;
  const std::size_t node = grid.size() / 2;
  const OrbitSample orbit = reconstruct_orbit(trace, node, t_end);
  const double c_est = estimate_c_infmax(le->hamiltonian(), grid).c_est;
  const EnergyReport energy =
      orbit_energy_check(orbit, model, c_est, cfg.tolerances.energy_level, cfg.tolerances.energy_tol);

  out.write("trace.csv", trace_csv(trace, cfg.sample_every));
  out.write("orbit.csv", orbit_csv(orbit, cfg.dim));
  out.write_json("trace.json", {{"tau", cfg.tau},
                                {"N", cfg.N},
                                {"R", R},
                                {"preset", cfg.preset},
                                {"potential", cfg.potential},
                                {"v_max", v_max},
                                {"datum", datum.id},
                                {"steps", trace.steps()},
                                {"T", t_end},
                                {"sample_every", cfg.sample_every},
                                {"last_boundary_time", trace.last_boundary_time()},
                                {"warnings", trace.warnings},
                                {"orbit",
                                 {{"node", node},
                                  {"c_est", c_est},
                                  {"max_normalized_energy", energy.max_normalized_energy},
                                  {"action", orbit.action},
                                  {"end_value", orbit.end_value},
                                  {"passed", energy.passed}}}});
  log << "evolve: " << trace.steps() << " steps, orbit max normalized energy "
      << energy.max_normalized_energy << "\n";
  return energy.passed;
}

bool regularity_experiment(const ExperimentConfig& cfg, OutputDirectory& out, int threads, std::ostream& log) {
  try {
    const RegularityReport rep = run_family_experiment(cfg, threads);
    out.write_json("regularity_report.json", rep.to_json());
    out.write("lip_series.csv", lip_series_csv(rep));
    log << "regularity-experiment: t0* " << (rep.all_detected ? format_double(rep.t0_star) : "not-detected")
        << ", iota* " << rep.iota_star << ", spread " << rep.lip_spread << ", K* " << rep.K_star << "\n";
    for (const auto& [name, value] : rep.checks.items()) {
      if (!value.get<bool>()) log << "regularity-experiment: check " << name << " FAILED\n";
    }
    for (const auto& [name, value] : rep.diagnostics.items()) {
      if (!value.get<bool>()) log << "regularity-experiment: diagnostic " << name << " outside tolerance\n";
    }
    return rep.passed;
  } catch (const ExperimentFailure& e) {
    out.write_json("regularity_report.partial.json", e.partial());
    throw;
  }
}

}  // namespace

int run(const RunOptions& options, std::ostream& log) {
  try {
    const ExperimentConfig cfg = parse_config(options.config);
    const int threads = std::max(1, options.threads);
    OutputDirectory out(options.out ? *options.out : std::filesystem::path(cfg.output_dir));
    out.write_json("config.json", cfg.to_json());
    bool ok = false;
    try {
      switch (options.command) {
        case Subcommand::verify_hr: ok = verify_hr(cfg, out, log); break;
        case Subcommand::critical_value: ok = critical_value(cfg, out, threads, log); break;
        case Subcommand::evolve: ok = evolve_command(cfg, out, threads, log); break;
        case Subcommand::regularity_experiment: ok = regularity_experiment(cfg, out, threads, log); break;
      }
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      log << name_of(options.command) << ": aborted: " << e.what() << "\n";
      out.write_metadata({{"subcommand", name_of(options.command)}, {"threads", threads}, {"aborted", e.what()}});
      out.write_manifest();
      return exit_code::failure;
    }
    out.write_metadata({{"subcommand", name_of(options.command)}, {"threads", threads}});
    out.write_manifest();
    return ok ? exit_code::ok : exit_code::checks_failed;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_code::failure;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
}

}  // namespace hjlab
