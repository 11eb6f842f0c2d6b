#include "imethod/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "imethod/functionals.hpp"
#include "imethod/multiplier.hpp"

namespace imethod {

namespace fs = std::filesystem;

std::optional<Command> parse_command(std::string_view name) {
  if (name == "evolve") return Command::evolve;
  if (name == "sweep") return Command::sweep;
  if (name == "check") return Command::check;
  if (name == "norms") return Command::norms;
  return std::nullopt;
}

std::string to_string(Command command) {
  switch (command) {
    case Command::evolve: return "evolve";
    case Command::sweep: return "sweep";
    case Command::check: return "check";
    case Command::norms: return "norms";
  }
  return "unknown";
}

fs::path run_directory(Command command, const RunConfig& cfg) {
  return fs::path(cfg.output_dir) / (to_string(command) + "-" + config_hash(cfg));
}

namespace {

double param(const CheckSpec& spec, const std::string& name, double fallback) {
  const auto it = spec.params.find(name);
  return it == spec.params.end() ? fallback : it->second;
}

void allow_params(const CheckSpec& spec, const std::set<std::string>& names) {
  for (const auto& [k, v] : spec.params) {
    if (!names.contains(k)) {
      throw ConfigError("checks." + spec.name + ": unknown parameter '" + k + "'");
    }
  }
}

double first_threshold(const RunConfig& cfg, const CheckSpec& spec) {
  if (spec.params.contains("N")) return spec.params.at("N");
  if (cfg.thresholds.empty()) throw ConfigError("checks." + spec.name + ": needs N or N_list");
  return cfg.thresholds.front();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CheckReport check_exact_plane_wave(const CheckSpec& spec, const RunConfig& cfg, const Field& u0) {
  allow_params(spec, {"tolerance"});
  if (cfg.initial_data.kind != InitialDataKind::plane_wave) {
    throw ConfigError("checks.exact_plane_wave: initial_data.kind must be plane_wave");
  }
  const Grid grid = u0.grid;
  const int n = cfg.dimension;
  const double c = cfg.initial_data.amplitude;
  std::vector<double> k(n);
  double k2 = 0.0;
  for (int a = 0; a < n; ++a) {
    k[a] = grid.frequency_step() * cfg.initial_data.wavevector[a];
    k2 += k[a] * k[a];
  }
  const double omega = k2 + std::pow(std::abs(c), 4.0 / n);
  double worst = 0.0;
  evolve(u0, cfg.step_config(), n, [&](double t, const Field& state) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto idx = grid.unflatten(i);
      double phase = -omega * t;
      for (int a = 0; a < n; ++a) phase += k[a] * grid.coordinate(idx[a]);
      worst = std::max(worst, std::abs(state.values[i] - std::polar(c, phase)));
    }
  });
  CheckReport r;
  r.name = "exact_plane_wave";
  r.inputs = {{"n", static_cast<double>(n)}, {"dt", cfg.dt}, {"t_final", cfg.t_final}};
  r.tolerance = param(spec, "tolerance", 1e-6);
  r.measured["omega"] = omega;
  r.measured["sup_error"] = worst;
  r.bound_lhs = worst;
  r.bound_rhs = r.tolerance;
  r.verdict = worst <= r.tolerance ? Verdict::pass : Verdict::fail;
  return r;
}

CheckReport check_mass_conservation(const CheckSpec& spec, const RunConfig& cfg, const Field& u0) {
  allow_params(spec, {"tolerance"});
  const double m0 = mass(u0);
  double worst = 0.0;
  long snapshots = 0;
  evolve(u0, cfg.step_config(), cfg.dimension, [&](double, const Field& state) {
    ++snapshots;
    worst = std::max(worst, std::abs(mass(state) / m0 - 1.0));
  });
  CheckReport r;
  r.name = "mass_conservation";
  r.inputs = {{"dt", cfg.dt},
              {"t_final", cfg.t_final},
              {"steps", static_cast<double>(cfg.step_config().step_count())}};
  r.tolerance = param(spec, "tolerance", 1e-10);
  r.measured["initial_mass"] = m0;
  r.measured["max_relative_deviation"] = worst;
  r.measured["snapshots"] = static_cast<double>(snapshots);
  r.bound_lhs = worst;
  r.bound_rhs = r.tolerance;
  r.verdict = worst <= r.tolerance ? Verdict::pass : Verdict::fail;
  return r;
}

CheckReport check_energy_drift(const CheckSpec& spec, const RunConfig& cfg, const Field& u0) {
  allow_params(spec, {"min_order", "max_order"});
  const int n = cfg.dimension;
  const double e0 = energy(u0, n).total();
  const std::vector<int> refinements = {1, 2, 5, 10};
  std::vector<double> steps(refinements.size()), drifts(refinements.size());
  CheckReport r;
  r.name = "energy_drift";
  r.inputs = {{"dt", cfg.dt}, {"t_final", cfg.t_final}, {"n", static_cast<double>(n)}};
  for (std::size_t i = 0; i < refinements.size(); ++i) {
    StepConfig c = cfg.step_config();
    c.dt = cfg.dt / refinements[i];
    c.snapshot_stride = cfg.snapshot_stride * refinements[i];
    double worst = 0.0;
    evolve(u0, c, n, [&](double, const Field& state) {
      worst = std::max(worst, std::abs(energy(state, n).total() - e0));
    });
    steps[i] = c.dt;
    drifts[i] = worst;
    char name[64];
    std::snprintf(name, sizeof name, "drift[dt=%.6g]", c.dt);
    r.measured[name] = worst;
  }
  const double lo = param(spec, "min_order", 1.8);
  const double hi = param(spec, "max_order", 2.2);
  r.tolerance = hi - lo;
  r.measured["initial_energy"] = e0;
  const bool positive = std::all_of(drifts.begin(), drifts.end(), [](double d) { return d > 0.0; });
  if (!positive) {
    r.verdict = Verdict::inconclusive;
    r.notes.emplace_back("energy drift below resolution at some step size");
    return r;
  }
  const auto fit = fit_loglog(steps, drifts);
  r.slope = fit.slope;
  r.bound_lhs = lo;
  r.bound_rhs = hi;
  r.verdict = fit.slope >= lo && fit.slope <= hi ? Verdict::pass : Verdict::fail;
  return r;
}

CheckReport check_reversibility(const CheckSpec& spec, const RunConfig& cfg, const Field& u0) {
  allow_params(spec, {"tolerance"});
  const auto steps = cfg.step_config().step_count();
  SplitStepSolver forward(u0.grid, cfg.dimension, cfg.dt, cfg.dealias);
  SplitStepSolver backward(u0.grid, cfg.dimension, -cfg.dt, cfg.dealias);
  Field u = u0;
  for (long k = 0; k < steps; ++k) forward.step(u);
  for (long k = 0; k < steps; ++k) backward.step(u);
  Field diff = u;
  for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= u0.values[i];
  const double err = l2_norm(diff) / l2_norm(u0);
  CheckReport r;
  r.name = "reversibility";
  r.inputs = {{"dt", cfg.dt}, {"steps", static_cast<double>(steps)}};
  r.tolerance = param(spec, "tolerance", 1e-10);
  r.measured["relative_l2_error"] = err;
  r.bound_lhs = err;
  r.bound_rhs = r.tolerance;
  r.verdict = err <= r.tolerance ? Verdict::pass : Verdict::fail;
  if (cfg.dealias) r.notes.emplace_back("the dealiasing filter is not invertible");
  return r;
}

std::vector<double> dyadic_scales(const Grid& grid) {
  std::vector<double> scales;
  for (double M = grid.frequency_step(); M <= grid.max_frequency(); M *= 2.0) scales.push_back(M);
  return scales;
}

RoughDataSpec rough_spec(const RunConfig& cfg) {
  RoughDataSpec d;
  d.s = cfg.s;
  d.delta = cfg.initial_data.delta;
  d.amplitude = cfg.initial_data.amplitude;
  d.seed = cfg.initial_data.seed;
  return d;
}

}  // namespace

CheckReport run_check(const CheckSpec& spec, const RunConfig& cfg, const Field& u0) {
  const auto& name = spec.name;
  const int n = cfg.dimension;
  if (name == "exact_plane_wave") return check_exact_plane_wave(spec, cfg, u0);
  if (name == "mass_conservation") return check_mass_conservation(spec, cfg, u0);
  if (name == "energy_drift") return check_energy_drift(spec, cfg, u0);
  if (name == "reversibility") return check_reversibility(spec, cfg, u0);
  if (name == "frequency_tail") {
    allow_params(spec, {"N", "M", "count"});
    const double N = first_threshold(cfg, spec);
    const double M = param(spec, "M", 4.0 * N);
    const int count = static_cast<int>(param(spec, "count", 0.0));
    if (count > 0) {
      if (cfg.initial_data.kind != InitialDataKind::rough) {
        throw ConfigError("checks.frequency_tail: count needs rough initial data");
      }
      return check_frequency_tail_ensemble(u0.grid, rough_spec(cfg), count, N, M);
    }
    return check_frequency_tail(u0, N, cfg.s, M);
  }
  if (name == "smoothness_decay") {
    allow_params(spec, {"N"});
    const auto scales = dyadic_scales(u0.grid);
    return check_smoothness_decay(u0, first_threshold(cfg, spec), cfg.s, scales);
  }
  if (name == "scaling") {
    allow_params(spec, {"lambda", "tolerance", "mass_tolerance"});
    const int lambda = static_cast<int>(param(spec, "lambda", cfg.lambda.value_or(2)));
    return check_scaling(u0, lambda, cfg.step_config(), n, param(spec, "tolerance", 1e-6),
                         param(spec, "mass_tolerance", 1e-12));
  }
  if (name == "almost_conservation") {
    allow_params(spec, {"max_slope", "consistency"});
    if (cfg.thresholds.empty()) throw ConfigError("checks.almost_conservation: needs N_list");
    auto result = sweep_almost_conservation(u0, cfg.s, cfg.thresholds, cfg.step_config(), n,
                                            param(spec, "max_slope", -0.5),
                                            param(spec, "consistency", 0.05));
    return result.report;
  }
  if (name == "modified_energy_identity") {
    allow_params(spec, {"tolerance", "rate_tolerance"});
    if (cfg.thresholds.empty()) throw ConfigError("checks.modified_energy_identity: needs N_list");
    const auto result =
        sweep_almost_conservation(u0, cfg.s, cfg.thresholds, cfg.step_config(), n);
    return check_modified_energy_identity(result, u0, cfg.s, n, param(spec, "tolerance", 0.05),
                                          param(spec, "rate_tolerance", 1e-10));
  }
  if (name == "interaction_morawetz") {
    allow_params(spec, {"budget", "lambda", "tolerance"});
    const double budget = param(spec, "budget", 10.0);
    if (spec.params.contains("lambda")) {
      return check_interaction_morawetz_scaling(u0, static_cast<int>(spec.params.at("lambda")),
                                                cfg.step_config(), n, budget,
                                                param(spec, "tolerance", 1e-3));
    }
    InteractionMorawetzProbe probe(n, budget);
    evolve(u0, cfg.step_config(), n, [&](double t, const Field& state) { probe.observe(t, state); });
    return probe.finish();
  }
  if (name == "almost_morawetz") {
    allow_params(spec, {});
    if (cfg.thresholds.empty()) throw ConfigError("checks.almost_morawetz: needs N_list");
    return sweep_almost_morawetz(u0, cfg.s, cfg.thresholds, cfg.step_config()).report;
  }
  if (name == "partition") {
    allow_params(spec, {"p", "q", "epsilon", "lambda"});
    const double diagonal = 2.0 * (n + 2.0) / n;
    const double p = param(spec, "p", diagonal);
    const double q = param(spec, "q", diagonal);
    std::vector<double> times, lq;
    evolve(u0, cfg.step_config(), n, [&](double t, const Field& state) {
      times.push_back(t);
      lq.push_back(lebesgue_norm(state, q));
    });
    auto part = partition_by_norm(times, lq, p, param(spec, "epsilon", 1.0),
                                  param(spec, "lambda", 1.0));
    part.report.inputs["q"] = q;
    return part.report;
  }
  if (name == "lambda_selection") {
    allow_params(spec, {"target", "lambda_cap", "slope_tolerance"});
    if (cfg.thresholds.empty()) throw ConfigError("checks.lambda_selection: needs N_list");
    return rescale_experiment(u0, cfg.s, cfg.thresholds, cfg.t_final, param(spec, "target", 0.5),
                              static_cast<int>(param(spec, "lambda_cap", 4096)),
                              param(spec, "slope_tolerance", 0.3))
        .report;
  }
  throw ConfigError("checks: unknown check '" + name + "'");
}

namespace {

void run_evolve(const RunConfig& cfg, const Field& u0, const fs::path& dir, RunOutcome& outcome) {
  const int n = cfg.dimension;
  fs::create_directories(dir / "checkpoints");
  std::ostringstream csv;
  csv << "index,t,mass,kinetic,potential,energy";
  for (double N : cfg.thresholds) csv << ",modified_energy[" << format_number(N) << "]";
  csv << "\n";
  long index = 0;
  evolve(u0, cfg.step_config(), n, [&](double t, const Field& state) {
    const auto e = energy(state, n);
    csv << index << "," << format_number(t) << "," << format_number(mass(state)) << ","
        << format_number(e.kinetic) << "," << format_number(e.potential) << ","
        << format_number(e.total());
    for (double N : cfg.thresholds) {
      csv << "," << format_number(modified_energy(state, N, cfg.s, n).total());
    }
    csv << "\n";
    char name[32];
    std::snprintf(name, sizeof name, "state_%06ld.nlsf", index);
    save_checkpoint(state, t, dir / "checkpoints" / name);
    ++index;
  });
  write_text(dir / "norms.csv", csv.str());
  (void)outcome;
}

void run_sweep(const RunConfig& cfg, const Field& u0, const fs::path& dir, RunOutcome& outcome,
               std::ostream& log) {
  if (cfg.thresholds.empty()) throw ConfigError("sweep: needs N or N_list");
  auto result =
      sweep_almost_conservation(u0, cfg.s, cfg.thresholds, cfg.step_config(), cfg.dimension);
  const std::string slope =
      result.report.slope ? format_number(*result.report.slope) : std::string("INCONCLUSIVE");
  std::ostringstream csv;
  csv << "N,s,G,L,dt,t_final,sup_increment,slope,seed\n";
  for (const auto& pt : result.points) {
    csv << format_number(pt.threshold) << "," << format_number(cfg.s) << "," << cfg.grid_points
        << "," << format_number(cfg.box_length) << "," << format_number(cfg.dt) << ","
        << format_number(cfg.t_final) << "," << format_number(pt.sup_increment) << "," << slope
        << "," << cfg.initial_data.seed << "\n";
  }
  write_text(dir / "sweep.csv", csv.str());
  write_text(dir / "sweep.json", to_json(result.report).dump(2) + "\n");
  if (!result.report.slope) {
    outcome.warnings.emplace_back("slope fit needs at least 3 non-control thresholds; reported INCONCLUSIVE");
  }
  log << summary_table({result.report});
  if (result.report.failed()) outcome.exit_code = kExitCheckFailed;
  outcome.reports.push_back(std::move(result.report));
}

void run_checks(const RunConfig& cfg, const Field& u0, const fs::path& dir, RunOutcome& outcome,
                std::ostream& log) {
  if (cfg.checks.empty()) throw ConfigError("check: the config declares no checks");
  std::map<std::string, int> seen;
  for (const auto& spec : cfg.checks) {
    auto report = run_check(spec, cfg, u0);
    const int count = seen[spec.name]++;
    const std::string file = count == 0 ? spec.name : spec.name + "_" + std::to_string(count);
    write_text(dir / (file + ".json"), to_json(report).dump(2) + "\n");
    if (report.failed()) outcome.exit_code = kExitCheckFailed;
    outcome.reports.push_back(std::move(report));
  }
  const auto table = summary_table(outcome.reports);
  write_text(dir / "summary.txt", table);
  log << table;
}

void run_norms(const RunConfig& cfg, const fs::path& dir, RunOutcome& outcome, std::ostream& log) {
  if (!cfg.checkpoint) throw ConfigError("norms: missing required field 'checkpoint'");
  const auto cp = load_checkpoint(*cfg.checkpoint);
  const Field& f = cp.field;
  const int n = f.grid.dim();
  const auto e = energy(f, n);
  std::vector<std::pair<std::string, double>> rows = {
      {"t", cp.time},
      {"mass", mass(f)},
      {"kinetic", e.kinetic},
      {"potential", e.potential},
      {"energy", e.total()},
      {"L2", l2_norm(f)},
      {"L4", lebesgue_norm(f, 4.0)},
      {"Linf", lebesgue_norm(f, kInfinity)},
      {"H1", sobolev_norm(f, 1.0, false)},
      {"H1/2_dot", sobolev_norm(f, 0.5, true)},
  };
  for (double N : cfg.thresholds) {
    rows.emplace_back("modified_energy[" + format_number(N) + "]",
                      modified_energy(f, N, cfg.s, n).total());
  }
  std::ostringstream csv;
  csv << "quantity,value\n";
  for (const auto& [k, v] : rows) csv << k << "," << format_number(v) << "\n";
  write_text(dir / "norms.csv", csv.str());
  log << csv.str();
  (void)outcome;
}

}  // namespace

RunOutcome run(Command command, const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  RunOutcome outcome;
  outcome.run_dir = run_directory(command, cfg);
  fs::create_directories(outcome.run_dir);
  write_text(outcome.run_dir / "config.json", to_json(cfg).dump(2) + "\n");

  if (command == Command::norms) {
    run_norms(cfg, outcome.run_dir, outcome, log);
    return outcome;
  }
  const Field u0 = synthesize_initial_data(cfg.grid(), cfg.initial_data, cfg.s);
  switch (command) {
    case Command::evolve: run_evolve(cfg, u0, outcome.run_dir, outcome); break;
    case Command::sweep: run_sweep(cfg, u0, outcome.run_dir, outcome, log); break;
    case Command::check: run_checks(cfg, u0, outcome.run_dir, outcome, log); break;
    case Command::norms: break;
  }
  return outcome;
}

int execute(const CliOptions& options, std::ostream& out, std::ostream& err) {
  const auto command = parse_command(options.command);
  if (!command) {
    err << "error: unknown command '" << options.command
        << "' (expected evolve | sweep | check | norms)\n";
    return kExitConfigError;
  }
  try {
    RunConfig cfg = load_config(options.config);
    if (options.out) cfg.output_dir = options.out->string();
    if (options.seed) cfg.initial_data.seed = *options.seed;
    const auto outcome = run(*command, cfg, out);
    for (const auto& w : outcome.warnings) err << "warning: " << w << "\n";
    out << "artifacts: " << outcome.run_dir.string() << "\n";
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SolverAbort& e) {
    err << "solver aborted: " << e.what() << "\n";
    return kExitSolverAbort;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

}  // namespace imethod
