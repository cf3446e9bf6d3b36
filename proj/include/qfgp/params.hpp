#pragma once

// Physical parameters of the atom / dielectric-sheet model. Everything past
// this header works in reduced units: frequencies in omega_pl, lengths in the
// gap a, times in 1/omega_pl.

#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace qfgp {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
/// Largest tangential speed accepted, as a fraction of c.
inline constexpr double kMaxSpeedFraction = 0.01;

/// Drude-Lorentz permittivity eps(w) = w_pl^2 / (w0^2 - w^2 - i w Gamma).
struct MaterialParams {
  double omega_pl = 1.0;      // rad/s
  double gamma_ratio = 0.1;   // Gamma / omega_pl
  double omega0_ratio = 0.0;  // omega_0 / omega_pl
  std::string label;

  bool is_drude() const { return omega0_ratio == 0.0; }
  /// Peak of Im[(eps-1)/(eps+1)] in reduced units: sqrt(1 + w0^2).
  double surface_resonance() const;
  /// Surface-plasmon frequency w_S / w_pl from w0^2 = w_S^2 - w_pl^2 / 2.
  double surface_plasmon_ratio() const;

  friend bool operator==(const MaterialParams&, const MaterialParams&) = default;
};

struct GeometryConfig {
  double alpha = kPi / 2;   // dipole polar angle, 0 = normal to the sheet
  double gamma_dip = 0.0;   // dipole azimuth, 0 = along the motion
  double gap_a = 3e-9;      // m
  double u = 0.0;           // v / (a omega_pl)

  /// Physical speed in m/s for the given plasma frequency.
  double speed(double omega_pl) const { return u * gap_a * omega_pl; }

  friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct SystemParams {
  double delta_ratio = 0.9;             // Delta / omega_pl
  double theta0 = 44.9 * kPi / 180.0;   // |psi0> = cos(theta0)|g> + sin(theta0)|e>
  double coupling_g = 1e-3;
  std::optional<double> alpha_pol;      // polarizability volume, m^3

  /// Polar angle of the initial state measured from the ground-state pole.
  double bloch_polar_angle() const { return 2.0 * theta0; }
  /// Period of the free precession, 2 pi / Delta, in reduced time.
  double period() const { return 2.0 * kPi / delta_ratio; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

void validate(const MaterialParams& m);
/// Checks angle ranges, gap, u >= 0 and the non-relativistic bound v <= 0.01 c.
void validate(const GeometryConfig& geo, const MaterialParams& m);
void validate(const SystemParams& sys);

/// d^2 = (3/2) hbar Delta alpha_pol and g = d^2 / (hbar a^3 omega_pl), which
/// reduces to (3/2) (Delta/omega_pl) alpha_pol / a^3.
double coupling_from_polarizability(double alpha_pol, double delta_ratio, double gap_a);

/// If alpha_pol is given, fills in or cross-checks coupling_g (1e-12 relative).
SystemParams resolve_coupling(SystemParams sys, const GeometryConfig& geo,
                              bool coupling_given);

/// Named material presets: "Au", "nSi", "paper-metal".
MaterialParams preset(std::string_view name);

/// Angular weight of the dipole coupling to a surface mode propagating at
/// in-plane angle theta.
double g_factor(double theta, double alpha, double gamma_dip);

enum class ResonanceMode { surface, literal };

/// Im[(eps - 1)/(eps + 1)] at reduced frequency w:
/// 2 w G / ((1 + w0^2 - w^2)^2 + w^2 G^2).
double surface_response(double omega_tilde, const MaterialParams& m);

/// Spectral denominator of the kernel integrand for the chosen mode.
///   surface: (1 + w0^2 - w^2)^2 + w^2 G^2
///   literal: (w0^2 - w^2)^2 + w^2 G^2
double resonance_denominator(double omega_tilde, const MaterialParams& m,
                             ResonanceMode mode);

std::string to_string(ResonanceMode mode);
ResonanceMode resonance_mode_from_string(std::string_view s);

void to_json(nlohmann::json& j, const MaterialParams& m);
void from_json(const nlohmann::json& j, MaterialParams& m);
void to_json(nlohmann::json& j, const GeometryConfig& g);
void from_json(const nlohmann::json& j, GeometryConfig& g);
void to_json(nlohmann::json& j, const SystemParams& s);
void from_json(const nlohmann::json& j, SystemParams& s);

}  // namespace qfgp
