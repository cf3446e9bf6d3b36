#pragma once

// Noise and dissipation kernels of a dipole moving parallel to a lossy sheet.
//
// In reduced units the kernels are
//
//   nu(t) + i eta(t) = s g Gamma / pi^2
//       * int_0^{w_max} dw  w / Den(w) e^{-i w t}
//       * int_0^{2 pi} dtheta G(theta, alpha, gamma) K(u cos(theta) t)
//
// where K(b) = int_0^inf k^2 e^{-2k} e^{i b k} dk = 2 / (2 - i b)^3 is the
// gap-integrated surface-mode factor. The frequency and angle integrals
// separate, so the 2D quadrature is evaluated as the product of an adaptive
// Gauss-Kronrod transform in w and a periodic trapezoid sum in theta.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfgp/params.hpp"

namespace qfgp {

enum class SignConvention {
  dissipative,  // global sign chosen so that nu(0) > 0
  literal,      // leading minus kept as printed, nu(0) < 0
};

std::string to_string(SignConvention s);
SignConvention sign_convention_from_string(std::string_view s);

struct KernelConfig {
  MaterialParams material = preset("paper-metal");
  GeometryConfig geometry;
  ResonanceMode resonance_mode = ResonanceMode::surface;
  double ir_cutoff = 1e-4;   // lower frequency limit, literal mode only
  double omega_max = 0.0;    // <= 0 selects default_omega_max()
  int n_theta = 128;
  double omega_tol = 1e-10;
  SignConvention sign_convention = SignConvention::dissipative;
  double coupling_g = 1e-3;

  double effective_omega_max() const;
  double lower_limit() const;
  double sign() const { return sign_convention == SignConvention::dissipative ? 1.0 : -1.0; }
};

/// 10 (w_res + Gamma), with w_res the surface resonance sqrt(1 + w0^2).
double default_omega_max(const MaterialParams& m);

void validate(const KernelConfig& cfg);

void to_json(nlohmann::json& j, const KernelConfig& c);
void from_json(const nlohmann::json& j, KernelConfig& c);

/// Digest of the full configuration, coupling included.
std::string config_digest(const KernelConfig& cfg);
/// Digest with the coupling normalised to 1: kernels are linear in g, so all
/// couplings share one unit-coupling table.
std::string shape_digest(const KernelConfig& cfg);

/// int_0^inf k^2 e^{-2k} e^{i b k} dk = 2 / (2 - i b)^3.
std::complex<double> inner_k_integral(double b);

/// W(t) = int w / Den(w) e^{-i w t} dw over [lower_limit, omega_max].
std::complex<double> spectral_transform(double t, const KernelConfig& cfg);

/// Theta(t) = int_0^{2 pi} G(theta) K(u cos(theta) t) dtheta, n_theta-point
/// periodic trapezoid.
std::complex<double> angular_factor(double t, const KernelConfig& cfg);

/// Upper bound on the neglected frequency tail at t = 0 relative to the
/// retained part: int_{w_max}^inf w/Den / int w/Den.
double truncation_tail_estimate(const KernelConfig& cfg);

struct KernelValue {
  double nu = 0.0;
  double eta = 0.0;
};

/// Kernel pair at time t. The defining integrals are valid for negative t as
/// well (nu even, eta odd); tables only store t >= 0.
KernelValue kernel_pair(double t, const KernelConfig& cfg);

struct KernelTable {
  double dt = 0.0;
  double t_max = 0.0;
  double coupling_g = 0.0;
  std::vector<double> t;
  std::vector<double> nu;
  std::vector<double> eta;
  std::string config_hash;
  double tail_estimate = 0.0;

  std::size_t size() const { return t.size(); }
  double t_end() const { return t.empty() ? 0.0 : t.back(); }
  /// Same grid with every value multiplied by `factor`.
  KernelTable scaled(double factor) const;
};

/// Checks t_max >= 30 periods of 2 pi / Delta and dt <= 2 pi / (20 max(Delta, w_res)).
void check_grid(const MaterialParams& m, double delta_ratio, double t_max, double dt);

/// Samples the kernels at t = 0, dt, 2 dt, ... up to the first point >= t_max.
/// Pointwise and deterministic; `workers` only changes wall time.
KernelTable tabulate(const KernelConfig& cfg, double delta_ratio, double t_max, double dt,
                     int workers = 1);

}  // namespace qfgp
