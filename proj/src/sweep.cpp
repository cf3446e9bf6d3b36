#include "qfgp/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfgp/error.hpp"
#include "qfgp/parallel.hpp"

namespace qfgp {

namespace {

double as_number(const std::string& name, const AxisValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw Error("validation", "sweep axis '" + name + "' expects numeric values");
}

nlohmann::json axis_value_json(const AxisValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

AxisValue axis_value_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.get<double>();
  throw Error("validation", "sweep axis values must be numbers or strings");
}

}  // namespace

void apply_axis_value(SimulationConfig& cfg, const std::string& name, const AxisValue& value) {
  if (name == "material") {
    const auto* label = std::get_if<std::string>(&value);
    if (!label) throw Error("validation", "sweep axis 'material' expects preset names");
    cfg.material = preset(*label);
    return;
  }
  const double x = as_number(name, value);
  if (name == "u") {
    cfg.geometry.u = x;
  } else if (name == "alpha") {
    cfg.geometry.alpha = x;
  } else if (name == "gamma_dip") {
    cfg.geometry.gamma_dip = x;
  } else if (name == "theta0") {
    cfg.system.theta0 = x;
  } else if (name == "gamma_ratio") {
    cfg.material.gamma_ratio = x;
  } else if (name == "n_cycles") {
    if (x != std::floor(x) || x < 1) throw Error("validation", "sweep axis 'n_cycles' must hold positive integers");
    cfg.n_cycles = static_cast<int>(x);
  } else if (name == "coupling_g") {
    cfg.system.coupling_g = x;
  } else if (name == "delta_ratio") {
    cfg.system.delta_ratio = x;
  } else {
    throw Error("validation", "unknown sweep axis '" + name + "'");
  }
}

std::vector<SweepPoint> expand_grid(const SweepSpec& spec) {
  if (spec.axes.empty()) {
    throw Error("validation", "sweep: at least one axis is required");
  }
  std::size_t total = 1;
  std::set<std::string> seen;
  for (const SweepAxis& axis : spec.axes) {
    if (axis.names.empty() || axis.rows.empty()) {
      throw Error("validation", "sweep: axes must be non-empty");
    }
    for (const auto& n : axis.names) {
      if (!seen.insert(n).second) throw Error("validation", "sweep: axis '" + n + "' given twice");
    }
    for (const auto& row : axis.rows) {
      if (row.size() != axis.names.size()) {
        throw Error("validation", "sweep: zipped axis rows must match the axis names");
      }
    }
    total *= axis.rows.size();
    if (total > spec.budget) {
      std::ostringstream os;
      os << "sweep: grid exceeds the point budget of " << spec.budget;
      throw Error("validation", os.str());
    }
  }

  std::vector<SweepPoint> points(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    SweepPoint& p = points[idx];
    p.index = idx;
    p.config = spec.base;
    std::size_t rest = idx;
    std::vector<std::size_t> pick(spec.axes.size());
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      pick[a] = rest % spec.axes[a].rows.size();
      rest /= spec.axes[a].rows.size();
    }
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const SweepAxis& axis = spec.axes[a];
      for (std::size_t k = 0; k < axis.names.size(); ++k) {
        const AxisValue& v = axis.rows[pick[a]][k];
        p.coords.emplace_back(axis.names[k], v);
        apply_axis_value(p.config, axis.names[k], v);
      }
    }
  }
  return points;
}

SweepResult run_sweep(const SweepSpec& spec, KernelCache& cache, int workers) {
  workers = resolve_workers(workers);
  SweepResult result;
  result.name = spec.name;
  result.points = expand_grid(spec);
  const std::size_t hits0 = cache.hits(), misses0 = cache.misses();

  parallel_for(result.points.size(), workers, [&](std::size_t i) {
    SweepPoint& p = result.points[i];
    try {
      p.series = phase_series(p.config, cache, 1);
    } catch (const Error& e) {
      p.error_kind = e.kind();
      p.error_message = e.what();
    } catch (const std::exception& e) {
      p.error_kind = "internal";
      p.error_message = e.what();
    }
  });

  for (const SweepPoint& p : result.points) {
    if (!p.series) result.failed.push_back(p.index);
  }
  result.cache_hits = cache.hits() - hits0;
  result.cache_misses = cache.misses() - misses0;
  return result;
}

nlohmann::json axes_to_json(const std::vector<SweepAxis>& axes) {
  nlohmann::json out = nlohmann::json::array();
  for (const SweepAxis& axis : axes) {
    nlohmann::json a = nlohmann::json::object();
    for (std::size_t k = 0; k < axis.names.size(); ++k) {
      nlohmann::json column = nlohmann::json::array();
      for (const auto& row : axis.rows) column.push_back(axis_value_json(row[k]));
      a[axis.names[k]] = column;
    }
    out.push_back(a);
  }
  return out;
}

std::vector<SweepAxis> axes_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("validation", "sweep.axes: must be a list of objects");
  std::vector<SweepAxis> axes;
  for (const auto& a : j) {
    if (!a.is_object() || a.empty()) {
      throw Error("validation", "sweep.axes: axes must be non-empty objects");
    }
    SweepAxis axis;
    std::size_t len = 0;
    bool first = true;
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!it.value().is_array()) {
        throw Error("validation", "sweep.axes." + it.key() + ": must be a list");
      }
      if (first) {
        len = it.value().size();
        axis.rows.assign(len, {});
        first = false;
      } else if (it.value().size() != len) {
        throw Error("validation", "sweep.axes." + it.key() + ": zipped lists differ in length");
      }
      axis.names.push_back(it.key());
      for (std::size_t r = 0; r < len; ++r) {
        axis.rows[r].push_back(axis_value_from_json(it.value()[r]));
      }
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

void to_json(nlohmann::json& j, const SweepSpec& s) {
  j = nlohmann::json{
      {"name", s.name}, {"base", s.base}, {"axes", axes_to_json(s.axes)}, {"budget", s.budget}};
}

void from_json(const nlohmann::json& j, SweepSpec& s) {
  s.name = j.value("name", std::string("sweep"));
  if (j.contains("base")) j.at("base").get_to(s.base);
  s.budget = j.value("budget", s.budget);
  s.axes = axes_from_json(j.at("axes"));
}

FitResult fit_velocity_scaling(std::span<const double> u, std::span<const double> correction,
                               double u_min, double u_max) {
  if (u.size() != correction.size()) {
    throw Error("validation", "fit: u and correction lengths differ");
  }
  constexpr double kFloor = 1e-12;
  std::vector<double> xs, ys;
  std::set<double> distinct;
  bool any_in_range = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0) || u[i] < u_min || u[i] > u_max) continue;
    any_in_range = true;
    if (std::abs(correction[i]) < kFloor) continue;
    xs.push_back(std::log(u[i]));
    ys.push_back(std::log(std::abs(correction[i])));
    distinct.insert(u[i]);
  }
  if (any_in_range && xs.empty()) {
    throw Error("zero-correction", "fit: every correction in range is below the numerical floor");
  }
  if (distinct.size() < 4) {
    throw Error("insufficient-points", "fit: need at least 4 distinct u > 0 in range");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  FitResult fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + fit.exponent * (xs[i] - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.u_min = u_min;
  fit.u_max = u_max;
  fit.n_points = xs.size();
  return fit;
}

FitResult fit_velocity_scaling(const SweepResult& sweep, double alpha, double gamma_dip, int cycle,
                               double u_min, double u_max) {
  std::vector<double> us, corr;
  for (const SweepPoint& p : sweep.points) {
    if (!p.series) continue;
    const GeometryConfig& g = p.config.geometry;
    if (std::abs(g.alpha - alpha) > 1e-12 || std::abs(g.gamma_dip - gamma_dip) > 1e-12) continue;
    if (cycle < 1 || static_cast<std::size_t>(cycle) > p.series->rows.size()) {
      throw Error("validation", "fit: requested cycle not present in the sweep");
    }
    us.push_back(g.u);
    corr.push_back(p.series->rows[cycle - 1].delta_phi_velocity);
  }
  return fit_velocity_scaling(us, corr, u_min, u_max);
}

namespace {

double ratio_from_phases(const std::vector<double>& moving, const std::vector<double>& free_phases,
                         int cycle) {
  const double phi_g = moving[cycle - 1];
  const double phi_c = free_phases[cycle - 1];
  return std::abs((phi_g - phi_c) / phi_c);
}

std::vector<double> run_cycle_phases(const SimulationConfig& cfg, int cycle, KernelCache& cache) {
  const double delta = cfg.system.delta_ratio;
  const double t_max = cfg.table_t_max();
  const double dt = cfg.numerics.kernel_dt;
  const KernelTable table = cfg.system.coupling_g == 0.0
                                ? tabulate(cfg.kernel_config(), delta, t_max, dt)
                                : cache.get(cfg.kernel_config(), delta, t_max, dt);
  const Trajectory traj = evolve(cfg.system, cfg.geometry, table, cycle, cfg.numerics.integrator);
  return cycle_phases(eigentrack(traj), cycle, cfg.numerics.phase_mode);
}

}  // namespace

double correction_ratio(const SimulationConfig& cfg, int cycle, KernelCache& cache) {
  SimulationConfig free_cfg = cfg;
  free_cfg.system.coupling_g = 0.0;
  return ratio_from_phases(run_cycle_phases(cfg, cycle, cache),
                           run_cycle_phases(free_cfg, cycle, cache), cycle);
}

CalibrationResult calibrate_coupling(const CalibrationTarget& target, const SimulationConfig& base,
                                     KernelCache& cache, double g_min, double g_max,
                                     double rel_tol) {
  if (!(target.ratio > 0.0 && target.ratio < 1.0)) {
    throw Error("validation", "calibrate: target ratio must lie in (0, 1)");
  }
  if (target.cycle < 1) throw Error("validation", "calibrate: cycle must be >= 1");

  SimulationConfig cfg = base;
  cfg.geometry.u = target.u;
  cfg.n_cycles = std::max(cfg.n_cycles, target.cycle);
  SimulationConfig free_cfg = cfg;
  free_cfg.system.coupling_g = 0.0;
  free_cfg.validate();
  const std::vector<double> free_phases = run_cycle_phases(free_cfg, target.cycle, cache);

  CalibrationResult result;
  auto evaluate = [&](double g) {
    SimulationConfig c = cfg;
    c.system.coupling_g = g;
    c.validate();
    const double r = ratio_from_phases(run_cycle_phases(c, target.cycle, cache), free_phases,
                                       target.cycle);
    result.history.push_back({g, r});
    return r;
  };
  auto unreachable = [&](const std::string& why) {
    std::ostringstream os;
    os << "calibrate: target ratio " << target.ratio << " unreachable for g in [" << g_min << ", "
       << g_max << "]: " << why;
    return Error("no-bracket", os.str());
  };

  // Decade scan from g_min upwards to bracket the target.
  double lo = g_min, r_lo = evaluate(g_min);
  if (r_lo >= target.ratio) throw unreachable("ratio already above target at g_min");
  double hi = 0.0, r_hi = 0.0;
  for (double g = g_min * 10.0;; g *= 10.0) {
    g = std::min(g, g_max);
    if (g <= lo * (1.0 + 1e-9)) throw unreachable("ratio stays below target");
    double r = 0.0;
    try {
      r = evaluate(g);
    } catch (const Error& e) {
      throw unreachable(std::string("evaluation failed at g = ") + std::to_string(g) + " (" +
                        e.what() + ")");
    }
    if (r < r_lo) {
      std::ostringstream os;
      os << "calibrate: ratio decreased from " << r_lo << " to " << r << " between g = " << lo
         << " and g = " << g;
      throw Error("non-monotonic", os.str());
    }
    if (r >= target.ratio) {
      hi = g;
      r_hi = r;
      break;
    }
    lo = g;
    r_lo = r;
    if (g >= g_max) throw unreachable("ratio stays below target");
  }

  double g = hi, r = r_hi;
  while (std::abs(r - target.ratio) > rel_tol * target.ratio) {
    g = std::sqrt(lo * hi);
    r = evaluate(g);
    if (r < r_lo || r > r_hi) {
      std::ostringstream os;
      os << "calibrate: ratio " << r << " at g = " << g << " outside the bracket values [" << r_lo
         << ", " << r_hi << "]";
      throw Error("non-monotonic", os.str());
    }
    if (r < target.ratio) {
      lo = g;
      r_lo = r;
    } else {
      hi = g;
      r_hi = r;
    }
    if (hi / lo - 1.0 < 1e-12) break;
  }
  result.coupling_g = g;
  result.achieved_ratio = r;
  result.bracket_lo = lo;
  result.bracket_hi = hi;
  return result;
}

SimulationConfig figure_base() {
  SimulationConfig cfg;
  cfg.material = preset("paper-metal");
  cfg.system.delta_ratio = 0.9;
  cfg.system.theta0 = 44.9 * kPi / 180.0;
  cfg.system.coupling_g = kCalibratedCoupling;
  cfg.geometry.alpha = kPi / 2;
  cfg.geometry.gamma_dip = 0.0;
  return cfg;
}

namespace {

SweepAxis numeric_axis(const std::string& name, const std::vector<double>& values) {
  SweepAxis axis;
  axis.names = {name};
  for (double v : values) axis.rows.push_back({v});
  return axis;
}

}  // namespace

SweepSpec figure_spec(int figure) {
  SweepSpec spec;
  spec.base = figure_base();
  switch (figure) {
    case 3: {
      spec.name = "fig3";
      spec.base.n_cycles = 15;
      SweepAxis orientation;
      orientation.names = {"alpha", "gamma_dip"};
      orientation.rows = {{0.1, kPi / 2}, {kPi / 2, 0.0}, {kPi / 2, kPi / 2}};
      spec.axes.push_back(std::move(orientation));
      spec.axes.push_back(numeric_axis(
          "u", {0.0, 0.002, 0.004, 0.006, 0.008, 0.01, 0.015, 0.02, 0.025, 0.03}));
      return spec;
    }
    case 4:
      spec.name = "fig4";
      spec.base.n_cycles = 20;
      // Intermediate velocities between 0 and 0.03 are our choice.
      spec.axes.push_back(numeric_axis("u", {0.0, 0.005, 0.01, 0.02, 0.03}));
      return spec;
    case 7: {
      spec.name = "fig7";
      spec.base.n_cycles = 20;
      SweepAxis coating;
      coating.names = {"material", "u"};
      coating.rows = {{std::string("nSi"), 0.0025}, {std::string("Au"), 6.4e-5}};
      spec.axes.push_back(std::move(coating));
      return spec;
    }
    default:
      break;
  }
  throw Error("validation", "no sweep preset for figure " + std::to_string(figure) +
                                " (expected 3, 4 or 7; figure 2 is a trajectory preset)");
}

SimulationConfig figure2_base() {
  SimulationConfig cfg = figure_base();
  cfg.n_cycles = 30;
  cfg.geometry.u = 0.007;
  return cfg;
}

std::vector<std::pair<std::string, SimulationConfig>> figure2_runs(const SimulationConfig& base) {
  struct Run {
    const char* label;
    double theta0_deg;
    double gamma_ratio;
    double alpha;
    bool coupled;
  };
  const Run runs[] = {
      {"isolated_45", 45.0, 0.1, kPi / 2, false},
      {"parallel_45_G0.1", 45.0, 0.1, kPi / 2, true},
      {"parallel_85_G0.05", 85.0, 0.05, kPi / 2, true},
      {"parallel_85_G0.1", 85.0, 0.1, kPi / 2, true},
      {"perpendicular_85_G0.1", 85.0, 0.1, 0.1, true},
  };
  std::vector<std::pair<std::string, SimulationConfig>> out;
  for (const Run& r : runs) {
    SimulationConfig cfg = base;
    cfg.geometry.alpha = r.alpha;
    cfg.material.gamma_ratio = r.gamma_ratio;
    cfg.system.theta0 = r.theta0_deg * kPi / 180.0;
    if (!r.coupled) cfg.system.coupling_g = 0.0;
    out.emplace_back(r.label, cfg);
  }
  return out;
}

}  // namespace qfgp
