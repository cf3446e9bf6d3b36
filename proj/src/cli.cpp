#include "qfgp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qfgp/config.hpp"
#include "qfgp/error.hpp"
#include "qfgp/geometric_phase.hpp"
#include "qfgp/kernel_cache.hpp"
#include "qfgp/output.hpp"
#include "qfgp/parallel.hpp"
#include "qfgp/quadrature.hpp"
#include "qfgp/sweep.hpp"

namespace qfgp {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Context {
  json doc = json::object();
  int workers = 1;
  std::ostream& err;
  int errors = 0;

  void report(const std::string& kind, const std::string& message, json extra = json::object()) {
    extra["kind"] = kind;
    extra["message"] = message;
    err << json{{"error", extra}}.dump() << "\n";
    ++errors;
  }
};

json base_document(const SimulationConfig& sim, int stride = 1) {
  RunConfig base = default_config();
  base.sim = sim;
  base.output.stride = stride;
  return canonical_json(base);
}

KernelTable table_for(const SimulationConfig& sim, KernelCache& cache, int workers) {
  if (sim.system.coupling_g == 0.0) {
    return tabulate(sim.kernel_config(), sim.system.delta_ratio, sim.table_t_max(),
                    sim.numerics.kernel_dt, workers);
  }
  return cache.get(sim.kernel_config(), sim.system.delta_ratio, sim.table_t_max(),
                   sim.numerics.kernel_dt, workers);
}

json files_json(const std::vector<std::filesystem::path>& files) {
  json out = json::array();
  for (const auto& f : files) out.push_back(f.generic_string());
  return out;
}

void report_failed_points(Context& ctx, const SweepResult& r) {
  for (std::size_t idx : r.failed) {
    const SweepPoint& p = r.points[idx];
    ctx.report(p.error_kind, p.error_message, {{"point", idx}});
  }
}

std::vector<std::pair<std::string, std::string>> sweep_notes(const SweepResult& r) {
  return {{"points", std::to_string(r.points.size())},
          {"failed", std::to_string(r.failed.size())},
          {"kernel_cache", std::to_string(r.cache_hits) + " hits, " +
                               std::to_string(r.cache_misses) + " misses"}};
}

json cmd_kernels(Context& ctx) {
  const auto t0 = Clock::now();
  const RunConfig cfg = from_document(ctx.doc);
  KernelCache cache = KernelCache::from_environment();
  const KernelTable table = table_for(cfg.sim, cache, ctx.workers);
  Provenance p{"kernels", cfg, seconds_since(t0),
               {{"table_digest", table.config_hash},
                {"tail_estimate", format_number(table.tail_estimate)}}};
  return {{"files", files_json(write_outputs(p, "kernels", kernel_table(table)))},
          {"rows", table.size()}};
}

json cmd_evolve(Context& ctx) {
  const auto t0 = Clock::now();
  const RunConfig cfg = from_document(ctx.doc);
  KernelCache cache = KernelCache::from_environment();
  const KernelTable table = table_for(cfg.sim, cache, ctx.workers);
  const Trajectory traj =
      evolve(cfg.sim.system, cfg.sim.geometry, table, cfg.sim.n_cycles, cfg.sim.numerics.integrator);
  double min_purity = 1.0, max_trace = 0.0, max_herm = 0.0;
  for (const TrajectorySample& s : traj.samples) {
    min_purity = std::min(min_purity, s.purity);
    max_trace = std::max(max_trace, s.trace_error);
    max_herm = std::max(max_herm, s.hermiticity_error);
  }
  Provenance p{"evolve", cfg, seconds_since(t0),
               {{"table_digest", traj.table_digest},
                {"min_purity", format_number(min_purity)},
                {"max_trace_error", format_number(max_trace)},
                {"max_hermiticity_error", format_number(max_herm)}}};
  return {{"files", files_json(write_outputs(p, "trajectory",
                                            trajectory_table(traj, cfg.output.stride)))},
          {"min_purity", min_purity}};
}

json cmd_phase(Context& ctx) {
  const auto t0 = Clock::now();
  const RunConfig cfg = from_document(ctx.doc);
  KernelCache cache = KernelCache::from_environment();
  const PhaseSeries s = phase_series(cfg.sim, cache, ctx.workers);
  Provenance p{"phase", cfg, seconds_since(t0),
               {{"phi_c_formula", format_number(s.phi_c_formula_bloch)},
                {"min_purity", format_number(s.min_purity)},
                {"table_digests", s.digest_moving + " " + s.digest_static + " " + s.digest_free}}};
  const PhaseRow& last = s.rows.back();
  return {{"files", files_json(write_outputs(p, "phase", phase_table(s)))},
          {"N", last.cycle},
          {"delta_phi", last.delta_phi},
          {"ratio", std::abs(last.delta_phi / last.phi_c)}};
}

json cmd_sweep(Context& ctx) {
  const auto t0 = Clock::now();
  const RunConfig cfg = from_document(ctx.doc);
  KernelCache cache = KernelCache::from_environment();
  const SweepResult r = run_sweep(cfg.sweep_spec(), cache, ctx.workers);
  report_failed_points(ctx, r);
  Provenance p{"sweep", cfg, seconds_since(t0), sweep_notes(r)};
  const auto files = write_outputs(p, cfg.sweep->name + "_data", sweep_table(r, cfg.sweep->all_cycles));
  return {{"files", files_json(files)}, {"points", r.points.size()}, {"failed", r.failed}};
}

json cmd_figure2(Context& ctx) {
  const auto t0 = Clock::now();
  RunConfig cfg = from_document(ctx.doc, base_document(figure2_base(), 80));
  cfg.sweep.reset();
  const auto runs = figure2_runs(cfg.sim);
  KernelCache cache = KernelCache::from_environment();
  std::vector<std::optional<Trajectory>> trajs(runs.size());
  std::vector<std::string> failures(runs.size());
  parallel_for(runs.size(), ctx.workers, [&](std::size_t i) {
    try {
      const SimulationConfig& sim = runs[i].second;
      sim.validate();
      trajs[i] = evolve(sim.system, sim.geometry, table_for(sim, cache, 1), sim.n_cycles,
                        sim.numerics.integrator);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  Table table;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!trajs[i]) {
      ctx.report("run-failed", failures[i], {{"run", runs[i].first}});
      continue;
    }
    Table t = trajectory_table(*trajs[i], cfg.output.stride);
    if (table.columns.empty()) {
      table.columns = {"run"};
      table.columns.insert(table.columns.end(), t.columns.begin(), t.columns.end());
    }
    for (auto& row : t.rows) {
      row.insert(row.begin(), runs[i].first);
      table.rows.push_back(std::move(row));
    }
  }
  Provenance p{"figure 2", cfg, seconds_since(t0), {}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!trajs[i]) continue;
    double min_purity = 1.0;
    for (const auto& s : trajs[i]->samples) min_purity = std::min(min_purity, s.purity);
    p.notes.emplace_back("min_purity " + runs[i].first, format_number(min_purity));
  }
  return {{"files", files_json(write_outputs(p, "fig2_data", table))}};
}

json cmd_figure_sweep(Context& ctx, int figure) {
  const auto t0 = Clock::now();
  SweepSpec spec = figure_spec(figure);
  RunConfig cfg = from_document(ctx.doc, base_document(spec.base));
  cfg.sweep.reset();
  spec.base = cfg.sim;
  KernelCache cache = KernelCache::from_environment();
  const SweepResult r = run_sweep(spec, cache, ctx.workers);
  report_failed_points(ctx, r);
  Provenance p{"figure " + std::to_string(figure), cfg, seconds_since(t0), sweep_notes(r)};
  json summary = json::object();
  if (figure == 3) {
    try {
      const FitResult fit = fit_velocity_scaling(r, kPi / 2, 0.0, spec.base.n_cycles, 0.002, 0.01);
      p.notes.emplace_back("fit alpha=pi/2 gamma_dip=0 u in [0.002, 0.01]",
                           "exponent " + format_number(fit.exponent) + " r_squared " +
                               format_number(fit.r_squared));
      summary["fit_exponent"] = fit.exponent;
      summary["fit_r_squared"] = fit.r_squared;
    } catch (const Error& e) {
      ctx.report(e.kind(), e.what());
    }
  }
  const std::string stem = "fig" + std::to_string(figure) + "_data";
  summary["files"] = files_json(write_outputs(p, stem, sweep_table(r, figure != 3)));
  summary["points"] = r.points.size();
  return summary;
}

json cmd_calibrate(Context& ctx, const CalibrationTarget& target) {
  const auto t0 = Clock::now();
  RunConfig cfg = from_document(ctx.doc, base_document(figure_spec(4).base));
  cfg.sweep.reset();
  KernelCache cache = KernelCache::from_environment();
  const CalibrationResult res = calibrate_coupling(target, cfg.sim, cache);
  SimulationConfig check = cfg.sim;
  check.geometry.u = target.u;
  check.system.coupling_g = res.coupling_g;
  check.n_cycles = std::max(check.n_cycles, target.cycle);
  const double rerun = correction_ratio(check, target.cycle, cache);

  Table t;
  t.columns = {"step", "coupling_g", "ratio"};
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    t.rows.push_back({static_cast<long long>(i), res.history[i].coupling_g, res.history[i].ratio});
  }
  std::ostringstream tgt;
  tgt << "u " << json(target.u).dump() << " N " << target.cycle << " ratio "
      << json(target.ratio).dump();
  Provenance p{"calibrate", cfg, seconds_since(t0),
               {{"target", tgt.str()},
                {"coupling_g", format_number(res.coupling_g)},
                {"achieved_ratio", format_number(res.achieved_ratio)},
                {"rerun_ratio", format_number(rerun)},
                {"bracket", format_number(res.bracket_lo) + " " + format_number(res.bracket_hi)}}};
  return {{"files", files_json(write_outputs(p, "calibration", t))},
          {"coupling_g", res.coupling_g},
          {"achieved_ratio", res.achieved_ratio},
          {"rerun_ratio", rerun}};
}

json cmd_validate(Context& ctx) {
  const auto t0 = Clock::now();
  const RunConfig cfg = from_document(ctx.doc);
  const std::vector<CheckResult> checks = fast_invariant_suite();
  Table t;
  t.columns = {"check", "deviation", "tolerance", "passed"};
  json summary = json::object();
  for (const CheckResult& c : checks) {
    t.rows.push_back({c.name, c.value, c.tolerance, static_cast<long long>(c.passed)});
    summary[c.name] = c.passed;
    if (!c.passed) {
      ctx.report("invariant-violation",
                 c.name + ": deviation " + format_number(c.value) + " exceeds " +
                     format_number(c.tolerance));
    }
  }
  Provenance p{"validate", cfg, seconds_since(t0), {}};
  return {{"files", files_json(write_outputs(p, "validate", t))}, {"checks", summary}};
}

}  // namespace

std::vector<CheckResult> fast_invariant_suite() {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double value, double tol) {
    out.push_back({std::move(name), value, tol, value < tol});
  };

  {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double th = angle(rng), al = angle(rng), ga = angle(rng);
      const double c = std::cos(th - ga), sa = std::sin(al), ca = std::cos(al);
      worst = std::max(worst, std::abs(g_factor(th, al, ga) - (sa * sa * c * c + ca * ca)));
    }
    add("g_factor_identity", worst, 1e-12);
  }

  {
    double worst = 0.0;
    for (double b : {0.0, 1.0, -7.5, 40.0}) {
      const auto f = [b](double k) {
        return k * k * std::exp(std::complex<double>(-2.0, b) * k);
      };
      std::vector<double> breaks;
      for (double k = 0.0; k <= 40.0; k += 0.25) breaks.push_back(k);
      const auto q = quad::integrate_adaptive(f, breaks, {1e-13, 0.0, 20000});
      const auto exact = inner_k_integral(b);
      worst = std::max(worst, std::abs(q.value - exact) / std::abs(exact));
    }
    add("inner_k_integral", worst, 1e-10);
  }

  {
    SimulationConfig sim;
    sim.system.coupling_g = 0.0;
    sim.system.theta0 = kPi / 6;
    sim.n_cycles = 1;
    KernelCache cache;
    const KernelTable table = table_for(sim, cache, 1);
    const Trajectory traj = evolve(sim.system, sim.geometry, table, 1, sim.numerics.integrator);
    const double phi = cycle_phases(eigentrack(traj), 1, PhaseMode::continuous).at(0);
    add("unitary_phase_closed_form", std::abs(phi - unitary_phase(2.0 * sim.system.theta0)), 1e-6);
  }

  {
    SimulationConfig sim = figure2_base();
    sim.n_cycles = 3;
    KernelCache cache;
    const KernelTable table = table_for(sim, cache, 1);
    const Trajectory traj = evolve(sim.system, sim.geometry, table, 3, sim.numerics.integrator);
    double trace = 0.0, herm = 0.0;
    for (const auto& s : traj.samples) {
      trace = std::max(trace, s.trace_error);
      herm = std::max(herm, s.hermiticity_error);
    }
    add("trace_conservation", trace, 1e-9);
    add("hermiticity", herm, 1e-10);

    EigenTrack track = eigentrack(traj);
    const double phi = geometric_phase(track, track.frames.back().t, PhaseMode::continuous);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    for (auto& f : track.frames) {
      for (auto& v : f.vectors) v *= std::polar(1.0, angle(rng));
    }
    const double regauged = geometric_phase(track, track.frames.back().t, PhaseMode::continuous);
    add("gauge_invariance", std::abs(regauged - phi), 1e-10);
  }

  {
    KernelConfig kc;
    kc.geometry.u = 0.01;
    kc.geometry.alpha = 0.7;
    kc.geometry.gamma_dip = 0.3;
    const KernelValue plus = kernel_pair(2.5, kc), minus = kernel_pair(-2.5, kc);
    const double scale = std::abs(plus.nu) + std::abs(plus.eta);
    add("kernel_parity",
        (std::abs(plus.nu - minus.nu) + std::abs(plus.eta + minus.eta)) / scale, 1e-9);
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric phase of a two-level atom moving over a lossy dielectric.", "qfgp"};
  app.set_version_flag("--version", std::string(QFGP_VERSION));
  app.require_subcommand(1);

  std::string config_source;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers = 0;
  app.add_option("-c,--config", config_source, "Configuration file, or inline JSON text");
  app.add_option("--set", overrides, "Override one key: section.key=value (repeatable)");
  app.add_option("-o,--out", out_dir, "Output directory (same as --set output.directory=...)");
  app.add_option("-w,--workers", workers, "Worker threads (default: $QFGP_WORKERS or all cores)");

  auto* kernels = app.add_subcommand("kernels", "Tabulate the noise and dissipation kernels");
  auto* evolve_cmd = app.add_subcommand("evolve", "Integrate the reduced dynamics");
  auto* phase = app.add_subcommand("phase", "Per-cycle geometric phase and its corrections");
  auto* sweep = app.add_subcommand("sweep", "Run the grid in the config's sweep section");
  auto* figure = app.add_subcommand("figure", "Reproduce a figure dataset (2, 3, 4 or 7)");
  int figure_number = 0;
  figure->add_option("number", figure_number, "Figure number")
      ->required()
      ->check(CLI::IsMember({2, 3, 4, 7}));
  auto* calibrate = app.add_subcommand("calibrate", "Fit the coupling to a target correction");
  CalibrationTarget target;
  calibrate->add_option("--u", target.u, "Velocity of the target point");
  calibrate->add_option("--cycle", target.cycle, "Cycle of the target point");
  calibrate->add_option("--ratio", target.ratio, "Target |delta_phi / phi_c|");
  auto* validate_cmd = app.add_subcommand("validate", "Run the fast invariant checks");
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  Context ctx{json::object(), 1, err};
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << QFGP_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    ctx.report("usage", e.what());
    return 2;
  }

  try {
    const auto t0 = Clock::now();
    if (!config_source.empty()) {
      const auto first = config_source.find_first_not_of(" \t\r\n");
      if (first != std::string::npos && config_source[first] == '{') {
        ctx.doc = parse_document(config_source);
      } else {
        std::ifstream in(config_source, std::ios::binary);
        if (!in) throw Error("io", "cannot read configuration file " + config_source);
        std::ostringstream buf;
        buf << in.rdbuf();
        ctx.doc = parse_document(buf.str());
      }
    }
    for (const std::string& o : overrides) apply_override(ctx.doc, o);
    if (!out_dir.empty()) {
      if (ctx.doc.contains("output") && !ctx.doc["output"].is_object()) {
        throw Error("validation", "output: must be an object");
      }
      ctx.doc["output"]["directory"] = out_dir;
    }
    ctx.workers = resolve_workers(workers);

    json summary;
    std::string command;
    if (kernels->parsed()) {
      command = "kernels";
      summary = cmd_kernels(ctx);
    } else if (evolve_cmd->parsed()) {
      command = "evolve";
      summary = cmd_evolve(ctx);
    } else if (phase->parsed()) {
      command = "phase";
      summary = cmd_phase(ctx);
    } else if (sweep->parsed()) {
      command = "sweep";
      summary = cmd_sweep(ctx);
    } else if (figure->parsed()) {
      command = "figure " + std::to_string(figure_number);
      summary = figure_number == 2 ? cmd_figure2(ctx) : cmd_figure_sweep(ctx, figure_number);
    } else if (calibrate->parsed()) {
      command = "calibrate";
      summary = cmd_calibrate(ctx, target);
    } else if (validate_cmd->parsed()) {
      command = "validate";
      summary = cmd_validate(ctx);
    }
    summary["command"] = command;
    summary["errors"] = ctx.errors;
    summary["wall_time_s"] = seconds_since(t0);
    out << summary.dump() << "\n";
  } catch (const Error& e) {
    ctx.report(e.kind(), e.what());
  } catch (const std::exception& e) {
    ctx.report("internal", e.what());
  }
  return ctx.errors == 0 ? 0 : 1;
}

}  // namespace qfgp
