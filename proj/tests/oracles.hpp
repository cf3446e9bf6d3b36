// Independent reference computations used by the tests. Nothing here calls
// into the quadrature or kernel code of the library.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "qfgp/kernel.hpp"
#include "qfgp/master_equation.hpp"

namespace oracle {

constexpr double pi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration in long double.
struct GaussRule {
  std::vector<long double> x, w;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  const long double lpi = std::numbers::pi_v<long double>;
  for (int i = 0; i < n; ++i) {
    long double z = std::cos(lpi * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const long double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-19L) break;
    }
    r.x[i] = z;
    r.w[i] = 2 / ((1 - z * z) * dp * dp);
  }
  return r;
}

// Composite rule: `panels` equal panels of an n-point Gauss rule on [a, b].
struct Grid {
  std::vector<double> x, w;
};

inline Grid composite(double a, double b, int panels, int n) {
  const GaussRule g = gauss_legendre(n);
  Grid out;
  const long double h = (static_cast<long double>(b) - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const long double mid = a + (p + 0.5L) * h;
    for (int i = 0; i < n; ++i) {
      out.x.push_back(static_cast<double>(mid + 0.5L * h * g.x[i]));
      out.w.push_back(static_cast<double>(0.5L * h * g.w[i]));
    }
  }
  return out;
}

// Defining integral of the inner k factor, in long double.
inline std::complex<double> inner_k_quadrature(double b) {
  static const GaussRule g = gauss_legendre(12);
  // panels short enough that b k turns by at most 5 rad across one
  const long double kmax = 40.0L, h = std::min(0.25L, 5.0L / std::max(std::fabs(b), 1.0));
  std::complex<long double> sum = 0;
  for (long double a = 0; a < kmax; a += h) {
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const long double k = a + 0.5L * h * (1 + g.x[i]);
      const long double mag = k * k * std::exp(-2 * k) * 0.5L * h * g.w[i];
      sum += std::polar(mag, static_cast<long double>(b) * k);
    }
  }
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

inline double g_four_term(double th, double al, double ga) {
  const double ca = std::cos(al), sa = std::sin(al);
  const double cg = std::cos(ga), sg = std::sin(ga);
  const double ct = std::cos(th), st = std::sin(th);
  return cg * cg * sa * sa * ct * ct + sg * sg * sa * sa * st * st +
         2 * cg * sg * sa * sa * ct * st + ca * ca;
}

// Unreduced triple integral over (w, theta, k) on a fixed tensor-product
// Gauss grid, k truncated at kmax. The integrand factorizes into a w part and
// a (theta, k) part, so the tensor sum is evaluated as a product of the two
// partial sums; this is the same number as the triple loop.
inline std::complex<double> brute_force_kernel(double t, const qfgp::KernelConfig& cfg,
                                               double kmax = 40.0) {
  const double gam = cfg.material.gamma_ratio, w0 = cfg.material.omega0_ratio;
  const double wmax = cfg.effective_omega_max();
  const Grid wg = composite(0.0, wmax, static_cast<int>(std::ceil(wmax / 0.02)), 10);
  std::complex<double> wsum = 0;
  for (std::size_t i = 0; i < wg.x.size(); ++i) {
    const double w = wg.x[i];
    const double den = std::pow(1 + w0 * w0 - w * w, 2) + w * w * gam * gam;
    wsum += wg.w[i] * (w / den) * std::polar(1.0, -w * t);
  }
  const Grid tg = composite(0.0, 2 * pi, 24, 12);
  const Grid kg = composite(0.0, kmax, static_cast<int>(kmax / 0.5), 10);
  const double u = cfg.geometry.u;
  std::complex<double> tk = 0;
  for (std::size_t a = 0; a < tg.x.size(); ++a) {
    const double th = tg.x[a];
    const double G = g_four_term(th, cfg.geometry.alpha, cfg.geometry.gamma_dip);
    std::complex<double> ks = 0;
    for (std::size_t b = 0; b < kg.x.size(); ++b) {
      const double k = kg.x[b];
      ks += kg.w[b] * k * k * std::exp(-2 * k) * std::polar(1.0, k * u * std::cos(th) * t);
    }
    tk += tg.w[a] * G * ks;
  }
  return cfg.coupling_g * cfg.sign() * gam / (pi * pi) * wsum * tk;
}

// Bloch-form generator written out by hand.
inline std::array<double, 3> bloch_generator(const std::array<double, 3>& r, double D, double f,
                                             double zeta, double delta) {
  return {-delta * r[1], delta * r[0] - 4 * D * r[1] + 4 * f * r[0], -4 * D * r[2] - 4 * zeta};
}

// Classical fixed-step RK4 on the Bloch equations. Steps are aligned with the
// kernel grid so the piecewise-linear coefficients are smooth inside a step.
inline std::vector<std::array<double, 3>> rk4_bloch(const qfgp::CoefficientTable& c,
                                                    double delta, double theta0, double h,
                                                    double t_end, double sample_every) {
  std::array<double, 3> r{std::sin(2 * theta0), 0.0, -std::cos(2 * theta0)};
  auto F = [&](double t, const std::array<double, 3>& s) {
    const qfgp::Coefficients k = c.at(t);
    return bloch_generator(s, k.D, k.f, k.zeta, delta);
  };
  std::vector<std::array<double, 3>> out{r};
  const long steps = std::lround(t_end / h);
  const long every = std::lround(sample_every / h);
  for (long n = 0; n < steps; ++n) {
    const double t = n * h;
    auto add = [](std::array<double, 3> a, const std::array<double, 3>& b, double s) {
      for (int i = 0; i < 3; ++i) a[i] += s * b[i];
      return a;
    };
    const auto k1 = F(t, r);
    const auto k2 = F(t + h / 2, add(r, k1, h / 2));
    const auto k3 = F(t + h / 2, add(r, k2, h / 2));
    const auto k4 = F(t + h, add(r, k3, h));
    for (int i = 0; i < 3; ++i) r[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    if ((n + 1) % every == 0) out.push_back(r);
  }
  return out;
}

// Plain trapezoid cumulative integral of v(s) * trig(delta s) on a uniform grid.
inline std::vector<double> cumulative(const std::vector<double>& t, const std::vector<double>& v,
                                      double delta, bool use_sin) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    auto g = [&](std::size_t j) {
      return v[j] * (use_sin ? std::sin(delta * t[j]) : std::cos(delta * t[j]));
    };
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (g(i - 1) + g(i));
  }
  return out;
}

// Eigenvalues of a 2x2 density matrix from its Bloch norm.
inline std::array<double, 2> bloch_eigenvalues(const qfgp::Matrix2& rho) {
  const double x = 2 * rho(1, 0).real(), y = 2 * rho(1, 0).imag();
  const double z = (rho(0, 0) - rho(1, 1)).real();
  const double r = std::sqrt(x * x + y * y + z * z);
  return {(1 + r) / 2, (1 - r) / 2};
}

}  // namespace oracle
