#include "qfgp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfgp/digest.hpp"
#include "qfgp/error.hpp"
#include "qfgp/parallel.hpp"
#include "qfgp/quadrature.hpp"

namespace qfgp {

std::string to_string(SignConvention s) {
  return s == SignConvention::dissipative ? "dissipative" : "literal";
}

SignConvention sign_convention_from_string(std::string_view s) {
  if (s == "dissipative") return SignConvention::dissipative;
  if (s == "literal") return SignConvention::literal;
  throw Error("validation", "numerics.sign_convention: expected 'dissipative' or 'literal'");
}

double default_omega_max(const MaterialParams& m) {
  return 10.0 * (m.surface_resonance() + m.gamma_ratio);
}

double KernelConfig::effective_omega_max() const {
  return omega_max > 0.0 ? omega_max : default_omega_max(material);
}

double KernelConfig::lower_limit() const {
  return resonance_mode == ResonanceMode::literal ? ir_cutoff : 0.0;
}

void validate(const KernelConfig& cfg) {
  validate(cfg.material);
  validate(cfg.geometry, cfg.material);
  if (cfg.n_theta < 32 || cfg.n_theta % 2 != 0) {
    throw Error("validation", "numerics.n_theta: must be even and >= 32");
  }
  const double floor = cfg.material.surface_resonance() + 10.0 * cfg.material.gamma_ratio;
  if (!(cfg.effective_omega_max() > floor)) {
    std::ostringstream os;
    os << "numerics.omega_max: must exceed resonance + 10 Gamma = " << floor;
    throw Error("validation", os.str());
  }
  if (!(cfg.omega_tol > 0.0 && cfg.omega_tol <= 1e-3)) {
    throw Error("validation", "numerics.omega_tol: must lie in (0, 1e-3]");
  }
  if (cfg.resonance_mode == ResonanceMode::literal &&
      !(cfg.ir_cutoff > 0.0 && cfg.ir_cutoff < cfg.effective_omega_max())) {
    throw Error("validation", "numerics.ir_cutoff: must lie in (0, omega_max) in literal mode");
  }
  if (!(cfg.coupling_g >= 0.0) || !std::isfinite(cfg.coupling_g)) {
    throw Error("validation", "system.coupling_g: must be >= 0");
  }
}

void to_json(nlohmann::json& j, const KernelConfig& c) {
  j = nlohmann::json{{"material", c.material},
                     {"geometry", c.geometry},
                     {"resonance_mode", to_string(c.resonance_mode)},
                     {"ir_cutoff", c.ir_cutoff},
                     {"omega_max", c.effective_omega_max()},
                     {"n_theta", c.n_theta},
                     {"omega_tol", c.omega_tol},
                     {"sign_convention", to_string(c.sign_convention)},
                     {"coupling_g", c.coupling_g}};
}

void from_json(const nlohmann::json& j, KernelConfig& c) {
  j.at("material").get_to(c.material);
  j.at("geometry").get_to(c.geometry);
  c.resonance_mode = resonance_mode_from_string(j.at("resonance_mode").get<std::string>());
  j.at("ir_cutoff").get_to(c.ir_cutoff);
  j.at("omega_max").get_to(c.omega_max);
  j.at("n_theta").get_to(c.n_theta);
  j.at("omega_tol").get_to(c.omega_tol);
  c.sign_convention = sign_convention_from_string(j.at("sign_convention").get<std::string>());
  j.at("coupling_g").get_to(c.coupling_g);
}

std::string config_digest(const KernelConfig& cfg) {
  return json_digest(nlohmann::json(cfg));
}

std::string shape_digest(const KernelConfig& cfg) {
  KernelConfig unit = cfg;
  unit.coupling_g = 1.0;
  // The label is cosmetic; gap_a only enters the speed check.
  unit.material.label.clear();
  unit.geometry.gap_a = 1.0;
  return json_digest(nlohmann::json(unit));
}

std::complex<double> inner_k_integral(double b) {
  const std::complex<double> z(2.0, -b);
  return 2.0 / (z * z * z);
}

namespace {

std::vector<double> frequency_breaks(double t, const KernelConfig& cfg) {
  const double lo = cfg.lower_limit();
  const double hi = cfg.effective_omega_max();
  const double res = cfg.material.surface_resonance();
  const double gam = cfg.material.gamma_ratio;
  std::vector<double> b{lo, hi};
  // Resolve the resonance peak(s) explicitly.
  for (double center : {res, cfg.material.omega0_ratio}) {
    for (double k : {-10.0, -3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0, 10.0}) {
      b.push_back(center + k * gam);
    }
  }
  // The literal mode diverges like 1/w towards the cutoff; grade geometrically.
  if (cfg.resonance_mode == ResonanceMode::literal) {
    for (double x = lo * 10.0; x < std::min(hi, 1.0); x *= 10.0) b.push_back(x);
  }
  // Roughly two oscillations of e^{-i w t} per starting panel.
  const double span = hi - lo;
  const auto panels = static_cast<std::size_t>(std::ceil(std::abs(t) * span / (4.0 * kPi)));
  for (std::size_t i = 1; i < panels; ++i) {
    b.push_back(lo + span * static_cast<double>(i) / static_cast<double>(panels));
  }
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b) {
    if (x < lo || x > hi) continue;
    if (!out.empty() && x - out.back() <= 1e-12 * (1.0 + std::abs(x))) continue;
    out.push_back(x);
  }
  if (out.back() != hi) out.back() = hi;
  return out;
}

}  // namespace

std::complex<double> spectral_transform(double t, const KernelConfig& cfg) {
  const MaterialParams& m = cfg.material;
  const ResonanceMode mode = cfg.resonance_mode;
  auto integrand = [&](double w) {
    const double weight = w / resonance_denominator(w, m, mode);
    return weight * std::polar(1.0, -w * t);
  };
  quad::AdaptiveOptions opts;
  opts.rel_tol = cfg.omega_tol;
  opts.max_intervals = 200000;
  return quad::integrate_adaptive(integrand, frequency_breaks(t, cfg), opts).value;
}

std::complex<double> angular_factor(double t, const KernelConfig& cfg) {
  const double alpha = cfg.geometry.alpha;
  const double gamma_dip = cfg.geometry.gamma_dip;
  const double ut = cfg.geometry.u * t;
  return quad::periodic_trapezoid(
      [&](double theta) {
        return g_factor(theta, alpha, gamma_dip) * inner_k_integral(ut * std::cos(theta));
      },
      cfg.n_theta);
}

double truncation_tail_estimate(const KernelConfig& cfg) {
  const double wmax = cfg.effective_omega_max();
  // Beyond the resonance w/Den ~ w^-3.
  const double tail = 0.5 / (wmax * wmax);
  const double body = std::abs(spectral_transform(0.0, cfg));
  return body > 0.0 ? tail / body : 0.0;
}

namespace {

// Kernel pair at unit coupling.
std::complex<double> unit_kernel(double t, const KernelConfig& cfg) {
  const double prefactor = cfg.sign() * cfg.material.gamma_ratio / (kPi * kPi);
  return prefactor * spectral_transform(t, cfg) * angular_factor(t, cfg);
}

}  // namespace

KernelValue kernel_pair(double t, const KernelConfig& cfg) {
  if (cfg.coupling_g == 0.0) {
    return {};
  }
  const std::complex<double> k = unit_kernel(t, cfg);
  return {cfg.coupling_g * k.real(), cfg.coupling_g * k.imag()};
}

KernelTable KernelTable::scaled(double factor) const {
  KernelTable out = *this;
  for (double& v : out.nu) v *= factor;
  for (double& v : out.eta) v *= factor;
  out.coupling_g = coupling_g * factor;
  return out;
}

void check_grid(const MaterialParams& m, double delta_ratio, double t_max, double dt) {
  if (!(dt > 0.0)) {
    throw Error("grid-too-coarse", "kernel grid: dt must be > 0");
  }
  const double period = 2.0 * kPi / delta_ratio;
  if (t_max < 30.0 * period * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "kernel grid: t_max = " << t_max << " is shorter than 30 system periods ("
       << 30.0 * period << ")";
    throw Error("grid-too-coarse", os.str());
  }
  const double fastest = std::max(delta_ratio, m.surface_resonance());
  const double limit = 2.0 * kPi / (20.0 * fastest);
  if (dt > limit) {
    std::ostringstream os;
    os << "kernel grid: dt = " << dt << " exceeds 2 pi / (20 max(Delta, w_res)) = " << limit;
    throw Error("grid-too-coarse", os.str());
  }
}

KernelTable tabulate(const KernelConfig& cfg, double delta_ratio, double t_max, double dt,
                     int workers) {
  validate(cfg);
  check_grid(cfg.material, delta_ratio, t_max, dt);
  const auto n = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9)) + 1;

  KernelTable table;
  table.dt = dt;
  table.t_max = t_max;
  table.coupling_g = cfg.coupling_g;
  table.config_hash = config_digest(cfg);
  table.t.resize(n);
  table.nu.assign(n, 0.0);
  table.eta.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    table.t[i] = static_cast<double>(i) * dt;
  }
  if (cfg.coupling_g == 0.0) {
    return table;
  }
  table.tail_estimate = truncation_tail_estimate(cfg);
  parallel_for(n, workers, [&](std::size_t i) {
    const KernelValue v = kernel_pair(table.t[i], cfg);
    table.nu[i] = v.nu;
    table.eta[i] = v.eta;
  });
  table.eta[0] = 0.0;
  return table;
}

}  // namespace qfgp
