#include "wide/commands.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "CLI11.hpp"
#include "wide/diagnostics.hpp"
#include "wide/io.hpp"
#include "wide/reference.hpp"
#include "wide/report_io.hpp"

namespace wide {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::string config;
  std::string out;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

RunConfig resolve_config(const GlobalFlags& flags) {
  RunConfig cfg = flags.config.empty() ? RunConfig{} : load_config(flags.config);
  if (!flags.out.empty()) cfg.output_dir = flags.out;
  if (flags.seed) cfg.datum.seed = *flags.seed;
  cfg.validate();
  for (const auto& w : cfg.warnings) fmt::print(stderr, "warning: {}\n", w);
  fs::create_directories(cfg.output_dir);
  return cfg;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string eps_dir(double eps, std::optional<double> sigma = std::nullopt) {
  std::string s = fmt::format("eps_{:.6g}", eps);
  if (sigma) s += fmt::format("_sigma_{:.6g}", *sigma);
  return s;
}

ELReport diagnostics_el(const Trajectory& traj, const WideParams& params, const RunConfig& cfg) {
  return el_report(traj, params, {cfg.diagnostics.s}, {cfg.diagnostics.buffer});
}

EnergyReport diagnostics_energy(const Trajectory& traj, const WideParams& params, const RunConfig& cfg) {
  return energy_report(traj, params, cfg.diagnostics.tol_energy, cfg.diagnostics.obs_fraction);
}

int cmd_minimize(const GlobalFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const VelocityField u0 = prepare_initial_datum(make_datum(cfg), cfg.params);
  const auto [traj, rep] = minimize_global(Trajectory::constant(u0, cfg.tau, cfg.steps()), cfg.params, cfg.optimizer);
  write_minimize_artifacts(cfg.output_dir, traj, cfg.params, rep, cfg);
  if (!flags.quiet)
    fmt::print("minimize: {} after {} iterations, I = {:.10g}, grad_norm = {:.3e}\n", rep.status, rep.iterations,
               rep.breakdown.total, rep.grad_norm);
  return rep.converged ? kExitOk : kExitNotConverged;
}

int cmd_incremental(const GlobalFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const VelocityField u0 = leray_project(make_datum(cfg));
  bool all = false;
  const Trajectory traj = run_incremental(u0, cfg.params, cfg.tau, cfg.steps(), cfg.optimizer, &all);
  write_checkpoint(traj, cfg.params, join(cfg.output_dir, "trajectory.bin"));
  const auto energy = diagnostics_energy(traj, cfg.params, cfg);
  write_text(join(cfg.output_dir, "energy_report.csv"), energy_csv(energy));
  JsonObject o;
  o.integer("steps", traj.steps()).boolean("all_converged", all);
  if (cfg.datum.kind == DatumKind::taylor_green)
    o.number("final_max_error",
             (traj.slices.back() - taylor_green(cfg.params.horizon, cfg.grid, cfg.params.nu, cfg.datum.amplitude))
                 .max_abs());
  o.object("params", params_json(cfg.params, cfg.tau, cfg.steps())).object("energy", energy_summary_json(energy));
  write_text(join(cfg.output_dir, "incremental_report.json"), o.dump() + "\n");
  if (!flags.quiet) fmt::print("incremental: {} steps, all converged = {}\n", traj.steps(), all);
  return all ? kExitOk : kExitNotConverged;
}

int cmd_reference(const GlobalFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const VelocityField u0 = leray_project(make_datum(cfg));
  const auto run = projection_solve(u0, cfg.params.nu, cfg.tau, cfg.steps(), cfg.params.convection);
  if (run.cfl_warning) fmt::print(stderr, "warning: CFL number {:.3g} exceeds 0.5\n", run.cfl);
  write_checkpoint(run.trajectory, cfg.params, join(cfg.output_dir, "reference.bin"));
  const auto energy = diagnostics_energy(run.trajectory, cfg.params, cfg);
  write_text(join(cfg.output_dir, "energy_report.csv"), energy_csv(energy));
  JsonObject o;
  o.integer("steps", run.trajectory.steps()).number("cfl", run.cfl).boolean("cfl_warning", run.cfl_warning);
  double err = std::nan("");
  if (cfg.datum.kind == DatumKind::taylor_green) {
    err = (run.trajectory.slices.back() -
           taylor_green(cfg.params.horizon, cfg.grid, cfg.params.nu, cfg.datum.amplitude))
              .max_abs();
    o.number("final_max_error", err);
  }
  o.object("params", params_json(cfg.params, cfg.tau, cfg.steps())).object("energy", energy_summary_json(energy));
  write_text(join(cfg.output_dir, "reference_report.json"), o.dump() + "\n");
  if (!flags.quiet) {
    fmt::print("reference: {} steps, cfl = {:.3g}", run.trajectory.steps(), run.cfl);
    if (std::isfinite(err)) fmt::print(", max error vs exact = {:.3e}", err);
    fmt::print("\n");
  }
  return kExitOk;
}

int cmd_sweep(const GlobalFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  SweepConfig sc;
  sc.datum = make_datum(cfg);
  sc.tau = cfg.tau;
  sc.base = cfg.params;
  sc.eps_list = cfg.sweep.eps_list.empty() ? std::vector<double>{cfg.params.epsilon} : cfg.sweep.eps_list;
  sc.optimizer = cfg.optimizer;
  sc.obs_fraction = cfg.diagnostics.obs_fraction;
  sc.trend_slack = cfg.sweep.trend_slack;
  sc.tol_energy = cfg.diagnostics.tol_energy;
  sc.sigma_alt = cfg.sweep.sigma_alt;
  sc.s = {cfg.diagnostics.s};
  sc.window = {cfg.diagnostics.buffer};
  sc.workers = flags.workers;
  sc.keep_trajectories = true;
  if (!flags.quiet) sc.log = [](const std::string& line) { fmt::print(stderr, "{}\n", line); };
  SweepReport report = epsilon_sweep(sc);

  auto write_entry = [&](const SweepEntry& e, const std::string& name) {
    WideParams p = cfg.params;
    p.epsilon = e.epsilon;
    p.sigma = e.sigma;
    const std::string dir = join(cfg.output_dir, name);
    fs::create_directories(dir);
    write_minimize_artifacts(dir, *e.trajectory, p, e.report, cfg);
  };
  for (const auto& e : report.entries) write_entry(e, eps_dir(e.epsilon));
  for (const auto& e : report.sigma_entries) write_entry(e, eps_dir(e.epsilon, e.sigma));
  write_text(join(cfg.output_dir, "sweep.csv"), sweep_csv(report));
  write_text(join(cfg.output_dir, "sweep.json"), sweep_json(report, cfg.wall_time).dump() + "\n");
  if (!flags.quiet) {
    for (const auto& e : report.entries)
      fmt::print("eps = {:<8g} dist_L2H1 = {:.4e}  dist_CL2 = {:.4e}  converged = {}\n", e.epsilon, e.distance.l2h1,
                 e.distance.cl2, e.converged);
    fmt::print("trend {}\n", report.trend_ok ? "ok" : "VIOLATED");
  }
  if (report.partial) {
    std::string failed;
    for (double e : report.failed_eps) failed += fmt::format(" {:g}", e);
    fmt::print(stderr, "sweep partial: no convergence for eps ={}\n", failed);
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_check(const GlobalFlags& flags, const std::string& checkpoint) {
  const RunConfig cfg = resolve_config(flags);
  const Checkpoint ck = read_checkpoint(checkpoint);
  const Trajectory& traj = ck.trajectory;
  const WideParams& params = ck.params;
  const auto el = diagnostics_el(traj, params, cfg);
  const auto energy = diagnostics_energy(traj, params, cfg);
  const auto apriori = apriori_bounds(traj, params, {cfg.diagnostics.s});
  const auto cert = sigma_certificate(params);
  const WideFunctional functional(traj.grid, traj.tau, traj.steps(), params);
  FunctionalBreakdown value;
  const double grad_norm = stationarity_norm(functional, functional.gradient_spectral(traj, &value));
  double div = 0.0;
  for (const auto& s : traj.slices) div = std::max(div, max_divergence(s));

  write_text(join(cfg.output_dir, "el_report.json"), el_json(el).dump() + "\n");
  write_text(join(cfg.output_dir, "energy_report.csv"), energy_csv(energy));

  struct Row {
    const char* name;
    double value;
    double limit;
    bool pass;
  };
  const Row rows[] = {
      {"stationarity", grad_norm, cfg.optimizer.grad_tol, grad_norm <= cfg.optimizer.grad_tol},
      {"divergence", div, 1e-10, div <= 1e-10},
      {"energy_unif", energy.max_unif_ratio, 1 + energy.tol, !energy.violation},
      {"strong_residual", el.strong_norm, cfg.diagnostics.strong_residual_max,
       el.strong_norm <= cfg.diagnostics.strong_residual_max},
      {"kernel_gap", el.kernel_gap, cfg.diagnostics.kernel_gap_max, el.kernel_gap <= cfg.diagnostics.kernel_gap_max},
      {"sigma_certificate", cert.c, 0.0, cert.valid},
  };
  bool all = true;
  std::vector<JsonObject> table;
  for (const auto& r : rows) {
    all = all && r.pass;
    JsonObject o;
    o.text("name", r.name).number("value", r.value).number("limit", r.limit).boolean("pass", r.pass);
    table.push_back(o);
    if (!flags.quiet)
      fmt::print("{:<18} {:>24} {:>24}  {}\n", r.name, format_double(r.value), format_double(r.limit),
                 r.pass ? "PASS" : "FAIL");
  }
  JsonObject report;
  report.object("params", params_json(params, traj.tau, traj.steps()))
      .number("total", value.total)
      .number("grad_norm", grad_norm)
      .number("max_divergence", div)
      .object("apriori", apriori_json(apriori))
      .object("certificate", certificate_json(cert))
      .object("energy", energy_summary_json(energy))
      .objects("checks", table)
      .boolean("pass", all);
  write_text(join(cfg.output_dir, "check_report.json"), report.dump() + "\n");
  return all ? kExitOk : kExitNotConverged;
}

}  // namespace

void write_minimize_artifacts(const std::string& dir, const Trajectory& traj, const WideParams& params,
                              const MinimizeReport& report, const RunConfig& cfg) {
  write_checkpoint(traj, params, join(dir, "checkpoint.bin"));
  const auto energy = diagnostics_energy(traj, params, cfg);
  JsonObject o = minimize_json(report, cfg.wall_time);
  o.object("params", params_json(params, traj.tau, traj.steps()))
      .object("apriori", apriori_json(apriori_bounds(traj, params, {cfg.diagnostics.s})))
      .object("certificate", certificate_json(sigma_certificate(params)))
      .object("energy", energy_summary_json(energy));
  write_text(join(dir, "minimize_report.json"), o.dump() + "\n");
  write_text(join(dir, "el_report.json"), el_json(diagnostics_el(traj, params, cfg)).dump() + "\n");
  write_text(join(dir, "energy_report.csv"), energy_csv(energy));
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Space-time variational Navier-Stokes solver on the periodic torus"};
  app.require_subcommand(1);
  GlobalFlags flags;
  std::uint64_t seed = 0;
  app.add_option("--config", flags.config, "INI or JSON run configuration");
  app.add_option("--out", flags.out, "output directory (overrides output.dir)");
  app.add_option("--workers", flags.workers, "parallel sweep members")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed for random_modes data (overrides datum.seed)");
  app.add_flag("--quiet", flags.quiet, "suppress progress output");

  auto* minimize = app.add_subcommand("minimize", "minimize the functional over the whole trajectory")->fallthrough();
  auto* incremental = app.add_subcommand("incremental", "causal slab-by-slab minimization")->fallthrough();
  auto* reference = app.add_subcommand("reference", "projection-method reference solve")->fallthrough();
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep against the reference solution")->fallthrough();
  auto* check = app.add_subcommand("check", "recompute diagnostics of a stored trajectory")->fallthrough();
  std::string checkpoint;
  check->add_option("checkpoint", checkpoint, "trajectory checkpoint")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (*seed_opt) flags.seed = seed;

  try {
    if (*minimize) return cmd_minimize(flags);
    if (*incremental) return cmd_incremental(flags);
    if (*reference) return cmd_reference(flags);
    if (*sweep) return cmd_sweep(flags);
    if (*check) return cmd_check(flags, checkpoint);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const InputError& e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return kExitConfig;
  } catch (const StructuralError& e) {
    fmt::print(stderr, "structural error: {}\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return kExitNotConverged;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "filesystem error: {}\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace wide
