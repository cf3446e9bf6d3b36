#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfgp/geometric_phase.hpp"
#include "qfgp/kernel_cache.hpp"
#include "qfgp/simulation.hpp"

namespace qfgp {

/// Coupling returned by calibrate_coupling for (u = 0.03, N = 20, ratio 0.6)
/// on the accumulation preset. Figure presets use it unless overridden.
inline constexpr double kCalibratedCoupling = 9.058e-3;

using AxisValue = std::variant<double, std::string>;

/// One sweep axis. Several names on one axis are zipped (row r sets every
/// name to its r-th value); distinct axes form a cartesian product.
struct SweepAxis {
  std::vector<std::string> names;
  std::vector<std::vector<AxisValue>> rows;
};

struct SweepSpec {
  std::string name = "sweep";
  SimulationConfig base;
  std::vector<SweepAxis> axes;
  std::size_t budget = 2000;
};

struct SweepPoint {
  std::size_t index = 0;
  std::vector<std::pair<std::string, AxisValue>> coords;
  SimulationConfig config;
  std::optional<PhaseSeries> series;
  std::string error_kind;
  std::string error_message;
};

struct SweepResult {
  std::string name;
  std::vector<SweepPoint> points;
  std::vector<std::size_t> failed;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

/// Axis names understood by apply_axis_value: u, alpha, gamma_dip, theta0,
/// gamma_ratio, n_cycles, coupling_g, delta_ratio, material (preset name).
void apply_axis_value(SimulationConfig& cfg, const std::string& name, const AxisValue& value);

/// Expands the grid in row-major order (last axis fastest).
std::vector<SweepPoint> expand_grid(const SweepSpec& spec);

/// One PhaseSeries per grid point, ordered by grid index. Failed points keep
/// their error and the sweep carries on.
SweepResult run_sweep(const SweepSpec& spec, KernelCache& cache, int workers = 1);

/// Axes as a list of objects; keys inside one object are zipped.
nlohmann::json axes_to_json(const std::vector<SweepAxis>& axes);
std::vector<SweepAxis> axes_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const SweepSpec& s);
void from_json(const nlohmann::json& j, SweepSpec& s);

struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  std::size_t n_points = 0;
};

/// Least-squares line through (log u, log |correction|) over u in [u_min, u_max].
FitResult fit_velocity_scaling(std::span<const double> u, std::span<const double> correction,
                               double u_min, double u_max);

/// Extracts delta_phi_velocity at `cycle` for one orientation and fits it.
FitResult fit_velocity_scaling(const SweepResult& sweep, double alpha, double gamma_dip, int cycle,
                               double u_min, double u_max);

struct CalibrationTarget {
  double u = 0.03;
  int cycle = 20;
  double ratio = 0.6;
};

struct CalibrationStep {
  double coupling_g = 0.0;
  double ratio = 0.0;
};

struct CalibrationResult {
  double coupling_g = 0.0;
  double achieved_ratio = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::vector<CalibrationStep> history;
};

/// |delta_phi(N) / phi_c(N)| for one configuration.
double correction_ratio(const SimulationConfig& cfg, int cycle, KernelCache& cache);

/// Bisects log g in [g_min, g_max] until |delta_phi(N)/phi_c(N)| is within
/// rel_tol of the target ratio. Throws "no-bracket" when the target is out of
/// reach and "non-monotonic" if the ratio is not increasing in g.
CalibrationResult calibrate_coupling(const CalibrationTarget& target, const SimulationConfig& base,
                                     KernelCache& cache, double g_min = 1e-6, double g_max = 1e-1,
                                     double rel_tol = 1e-3);

/// Base configuration shared by the figure presets: paper-metal,
/// Delta = 0.9, theta0 = 44.9 deg, calibrated coupling.
SimulationConfig figure_base();

/// Phase sweeps reproducing figures 3, 4 and 7.
SweepSpec figure_spec(int figure);

/// Shared settings of the figure 2 trajectories (u = 0.007, 30 cycles).
SimulationConfig figure2_base();
/// Labelled trajectory runs of figure 2; each sets theta0, gamma_ratio and
/// alpha on top of `base`, and the isolated run switches the coupling off.
std::vector<std::pair<std::string, SimulationConfig>> figure2_runs(
    const SimulationConfig& base = figure2_base());

}  // namespace qfgp
