#include "qfgp/simulation.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "qfgp/error.hpp"

namespace qfgp {

std::string to_string(PhaseMode m) {
  return m == PhaseMode::continuous ? "continuous" : "per_cycle";
}

PhaseMode phase_mode_from_string(std::string_view s) {
  if (s == "continuous") return PhaseMode::continuous;
  if (s == "per_cycle") return PhaseMode::per_cycle;
  throw Error("validation", "numerics.phase_mode: expected 'continuous' or 'per_cycle'");
}

bool operator==(const NumericsConfig& a, const NumericsConfig& b) {
  return nlohmann::json(a) == nlohmann::json(b);
}

KernelConfig SimulationConfig::kernel_config() const {
  KernelConfig k;
  k.material = material;
  k.geometry = geometry;
  k.resonance_mode = numerics.resonance_mode;
  k.ir_cutoff = numerics.ir_cutoff;
  k.omega_max = numerics.omega_max;
  k.n_theta = numerics.n_theta;
  k.omega_tol = numerics.omega_tol;
  k.sign_convention = numerics.sign_convention;
  k.coupling_g = system.coupling_g;
  return k;
}

double SimulationConfig::table_t_max() const {
  return std::max(numerics.min_table_cycles, n_cycles + 1) * system.period();
}

void SimulationConfig::validate() const {
  qfgp::validate(system);
  qfgp::validate(kernel_config());
  if (n_cycles < 1) {
    throw Error("validation", "system.n_cycles: must be >= 1");
  }
  if (numerics.min_table_cycles < 30) {
    throw Error("validation", "numerics.min_table_cycles: must be >= 30");
  }
  check_grid(material, system.delta_ratio, table_t_max(), numerics.kernel_dt);
  const IntegratorOptions& o = numerics.integrator;
  if (!(o.rel_tol > 0.0) || !(o.abs_tol > 0.0)) {
    throw Error("validation", "numerics.rel_tol / numerics.abs_tol: must be > 0");
  }
  if (!(o.initial_step > 0.0) || !(o.min_step > 0.0) || !(o.purity_guard > 0.0)) {
    throw Error("validation",
                "numerics.initial_step / numerics.min_step / numerics.purity_guard: must be > 0");
  }
  if (o.samples_per_cycle < 4) {
    throw Error("validation", "numerics.samples_per_cycle: must be >= 4");
  }
}

void to_json(nlohmann::json& j, const NumericsConfig& n) {
  j = nlohmann::json{{"resonance_mode", to_string(n.resonance_mode)},
                     {"sign_convention", to_string(n.sign_convention)},
                     {"ir_cutoff", n.ir_cutoff},
                     {"omega_max", n.omega_max},
                     {"n_theta", n.n_theta},
                     {"omega_tol", n.omega_tol},
                     {"kernel_dt", n.kernel_dt},
                     {"min_table_cycles", n.min_table_cycles},
                     {"rel_tol", n.integrator.rel_tol},
                     {"abs_tol", n.integrator.abs_tol},
                     {"samples_per_cycle", n.integrator.samples_per_cycle},
                     {"initial_step", n.integrator.initial_step},
                     {"min_step", n.integrator.min_step},
                     {"purity_guard", n.integrator.purity_guard},
                     {"phase_mode", to_string(n.phase_mode)}};
}

void from_json(const nlohmann::json& j, NumericsConfig& n) {
  n.resonance_mode = resonance_mode_from_string(j.at("resonance_mode").get<std::string>());
  n.sign_convention = sign_convention_from_string(j.at("sign_convention").get<std::string>());
  j.at("ir_cutoff").get_to(n.ir_cutoff);
  j.at("omega_max").get_to(n.omega_max);
  j.at("n_theta").get_to(n.n_theta);
  j.at("omega_tol").get_to(n.omega_tol);
  j.at("kernel_dt").get_to(n.kernel_dt);
  j.at("min_table_cycles").get_to(n.min_table_cycles);
  j.at("rel_tol").get_to(n.integrator.rel_tol);
  j.at("abs_tol").get_to(n.integrator.abs_tol);
  j.at("samples_per_cycle").get_to(n.integrator.samples_per_cycle);
  j.at("initial_step").get_to(n.integrator.initial_step);
  j.at("min_step").get_to(n.integrator.min_step);
  j.at("purity_guard").get_to(n.integrator.purity_guard);
  n.phase_mode = phase_mode_from_string(j.at("phase_mode").get<std::string>());
}

void to_json(nlohmann::json& j, const SimulationConfig& c) {
  j = nlohmann::json{{"material", c.material},
                     {"geometry", c.geometry},
                     {"system", c.system},
                     {"numerics", c.numerics},
                     {"n_cycles", c.n_cycles}};
}

void from_json(const nlohmann::json& j, SimulationConfig& c) {
  j.at("material").get_to(c.material);
  j.at("geometry").get_to(c.geometry);
  j.at("system").get_to(c.system);
  j.at("numerics").get_to(c.numerics);
  j.at("n_cycles").get_to(c.n_cycles);
}

}  // namespace qfgp
