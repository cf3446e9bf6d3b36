#include "qfgp/params.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfgp/error.hpp"

namespace qfgp {

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& constraint) {
  throw Error("validation", key + ": " + constraint);
}

}  // namespace

double MaterialParams::surface_resonance() const {
  return std::sqrt(1.0 + omega0_ratio * omega0_ratio);
}

double MaterialParams::surface_plasmon_ratio() const {
  return std::sqrt(omega0_ratio * omega0_ratio + 0.5);
}

void validate(const MaterialParams& m) {
  if (!(m.omega_pl > 0.0) || !std::isfinite(m.omega_pl)) {
    invalid("material.omega_pl", "must be > 0");
  }
  if (!(m.gamma_ratio > 0.0) || !std::isfinite(m.gamma_ratio)) {
    invalid("material.gamma_ratio", "must be > 0");
  }
  if (!(m.omega0_ratio >= 0.0) || !std::isfinite(m.omega0_ratio)) {
    invalid("material.omega0_ratio", "must be >= 0");
  }
}

void validate(const GeometryConfig& geo, const MaterialParams& m) {
  if (!(geo.alpha >= 0.0 && geo.alpha <= kPi / 2)) {
    invalid("geometry.alpha", "must lie in [0, pi/2]");
  }
  if (!(geo.gamma_dip >= 0.0 && geo.gamma_dip < 2.0 * kPi)) {
    invalid("geometry.gamma_dip", "must lie in [0, 2 pi)");
  }
  if (!(geo.gap_a > 0.0) || !std::isfinite(geo.gap_a)) {
    invalid("geometry.gap_a", "must be > 0");
  }
  if (!(geo.u >= 0.0) || !std::isfinite(geo.u)) {
    invalid("geometry.u", "must be >= 0");
  }
  const double v = geo.speed(m.omega_pl);
  if (v > kMaxSpeedFraction * kSpeedOfLight) {
    std::ostringstream os;
    os << "non-relativistic bound violated: v = " << v << " m/s exceeds 0.01 c";
    invalid("geometry.u", os.str());
  }
}

void validate(const SystemParams& sys) {
  if (!(sys.delta_ratio > 0.0) || !std::isfinite(sys.delta_ratio)) {
    invalid("system.delta_ratio", "must be > 0");
  }
  if (!(sys.theta0 > 0.0 && sys.theta0 < kPi / 2)) {
    invalid("system.theta0", "must lie in (0, pi/2)");
  }
  if (!(sys.coupling_g >= 0.0) || !std::isfinite(sys.coupling_g)) {
    invalid("system.coupling_g", "must be >= 0");
  }
  if (sys.alpha_pol && !(*sys.alpha_pol > 0.0)) {
    invalid("system.alpha_pol", "must be > 0");
  }
}

double coupling_from_polarizability(double alpha_pol, double delta_ratio, double gap_a) {
  return 1.5 * delta_ratio * alpha_pol / (gap_a * gap_a * gap_a);
}

SystemParams resolve_coupling(SystemParams sys, const GeometryConfig& geo,
                              bool coupling_given) {
  if (!sys.alpha_pol) {
    return sys;
  }
  const double derived = coupling_from_polarizability(*sys.alpha_pol, sys.delta_ratio, geo.gap_a);
  if (coupling_given) {
    const double scale = std::max(std::abs(derived), std::abs(sys.coupling_g));
    if (std::abs(derived - sys.coupling_g) > 1e-12 * scale) {
      std::ostringstream os;
      os.precision(17);
      os << "coupling_g = " << sys.coupling_g << " disagrees with alpha_pol-derived value "
         << derived;
      invalid("system.coupling_g", os.str());
    }
  }
  sys.coupling_g = derived;
  return sys;
}

MaterialParams preset(std::string_view name) {
  // Drude-Lorentz fits quoted for the proposed rotating-disk coatings.
  if (name == "Au") {
    return {1.37e16, 0.05, 0.0, "Au"};
  }
  // Gamma/omega_pl is quoted only as "~ 1" for n-doped Si.
  if (name == "nSi") {
    return {3.5e14, 1.0, 0.0, "nSi"};
  }
  // Reduced-unit metal used for the velocity and accumulation figures; the
  // plasma frequency stays symbolic.
  if (name == "paper-metal") {
    return {1.0, 0.1, 0.0, "paper-metal"};
  }
  throw Error("unknown-preset", "unknown material preset '" + std::string(name) +
                                    "' (expected Au, nSi or paper-metal)");
}

double g_factor(double theta, double alpha, double gamma_dip) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cg = std::cos(gamma_dip), sg = std::sin(gamma_dip);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double sa2 = sa * sa;
  return cg * cg * sa2 * ct * ct + sg * sg * sa2 * st * st + 2.0 * cg * sg * sa2 * ct * st +
         ca * ca;
}

double surface_response(double omega_tilde, const MaterialParams& m) {
  const double w = omega_tilde;
  const double gam = m.gamma_ratio;
  const double w0 = m.omega0_ratio;
  const double re = 1.0 + w0 * w0 - w * w;
  return 2.0 * w * gam / (re * re + w * w * gam * gam);
}

double resonance_denominator(double omega_tilde, const MaterialParams& m, ResonanceMode mode) {
  const double w = omega_tilde;
  const double w0 = m.omega0_ratio;
  const double re = (mode == ResonanceMode::surface ? 1.0 : 0.0) + w0 * w0 - w * w;
  return re * re + w * w * m.gamma_ratio * m.gamma_ratio;
}

std::string to_string(ResonanceMode mode) {
  return mode == ResonanceMode::surface ? "surface" : "literal";
}

ResonanceMode resonance_mode_from_string(std::string_view s) {
  if (s == "surface") return ResonanceMode::surface;
  if (s == "literal") return ResonanceMode::literal;
  throw Error("validation", "numerics.resonance_mode: expected 'surface' or 'literal'");
}

void to_json(nlohmann::json& j, const MaterialParams& m) {
  j = nlohmann::json{{"label", m.label},
                     {"omega_pl", m.omega_pl},
                     {"gamma_ratio", m.gamma_ratio},
                     {"omega0_ratio", m.omega0_ratio}};
}

void from_json(const nlohmann::json& j, MaterialParams& m) {
  j.at("omega_pl").get_to(m.omega_pl);
  j.at("gamma_ratio").get_to(m.gamma_ratio);
  j.at("omega0_ratio").get_to(m.omega0_ratio);
  m.label = j.value("label", std::string{});
}

void to_json(nlohmann::json& j, const GeometryConfig& g) {
  j = nlohmann::json{
      {"alpha", g.alpha}, {"gamma_dip", g.gamma_dip}, {"gap_a", g.gap_a}, {"u", g.u}};
}

void from_json(const nlohmann::json& j, GeometryConfig& g) {
  j.at("alpha").get_to(g.alpha);
  j.at("gamma_dip").get_to(g.gamma_dip);
  j.at("gap_a").get_to(g.gap_a);
  j.at("u").get_to(g.u);
}

void to_json(nlohmann::json& j, const SystemParams& s) {
  j = nlohmann::json{
      {"delta_ratio", s.delta_ratio}, {"theta0", s.theta0}, {"coupling_g", s.coupling_g}};
  if (s.alpha_pol) {
    j["alpha_pol"] = *s.alpha_pol;
  }
}

void from_json(const nlohmann::json& j, SystemParams& s) {
  j.at("delta_ratio").get_to(s.delta_ratio);
  j.at("theta0").get_to(s.theta0);
  j.at("coupling_g").get_to(s.coupling_g);
  if (j.contains("alpha_pol") && !j.at("alpha_pol").is_null()) {
    s.alpha_pol = j.at("alpha_pol").get<double>();
  } else {
    s.alpha_pol.reset();
  }
}

}  // namespace qfgp
