#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "qfgp/kernel.hpp"
#include "qfgp/master_equation.hpp"
#include "qfgp/params.hpp"

namespace qfgp {

/// How the open-system phase is accumulated across cycles.
enum class PhaseMode {
  continuous,  // one chain from t = 0, read at every cycle boundary
  per_cycle,   // chain restarted at each boundary, per-cycle phases summed
};

std::string to_string(PhaseMode m);
PhaseMode phase_mode_from_string(std::string_view s);

struct NumericsConfig {
  ResonanceMode resonance_mode = ResonanceMode::surface;
  SignConvention sign_convention = SignConvention::dissipative;
  double ir_cutoff = 1e-4;
  double omega_max = 0.0;  // <= 0: default_omega_max()
  int n_theta = 128;
  double omega_tol = 1e-10;
  double kernel_dt = 0.05;
  /// Kernel tables always span at least this many free periods.
  int min_table_cycles = 30;
  IntegratorOptions integrator;
  PhaseMode phase_mode = PhaseMode::continuous;

  friend bool operator==(const NumericsConfig&, const NumericsConfig&);
};

/// Everything one phase computation depends on.
struct SimulationConfig {
  MaterialParams material = preset("paper-metal");
  GeometryConfig geometry;
  SystemParams system;
  NumericsConfig numerics;
  int n_cycles = 15;

  KernelConfig kernel_config() const;
  /// Table horizon: max(min_table_cycles, n_cycles + 1) free periods.
  double table_t_max() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const NumericsConfig& n);
void from_json(const nlohmann::json& j, NumericsConfig& n);
void to_json(nlohmann::json& j, const SimulationConfig& c);
void from_json(const nlohmann::json& j, SimulationConfig& c);

}  // namespace qfgp
