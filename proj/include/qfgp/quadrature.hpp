#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace qfgp::quad {

using Integrand = std::function<std::complex<double>(double)>;

struct AdaptiveOptions {
  /// Stop when the summed error estimate is below rel_tol * integral of |f|.
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_intervals = 20000;
};

struct AdaptiveResult {
  std::complex<double> value;
  double error = 0.0;       // summed Kronrod error estimate
  double l1_norm = 0.0;     // integral of |f| by the same rule
  std::size_t intervals = 0;
  std::size_t evaluations = 0;
};

/// Globally adaptive 21-point Gauss-Kronrod integration of a complex-valued
/// integrand over [a, b], starting from the sorted partition `breaks`
/// (which must begin at a and end at b). The interval with the largest error
/// is bisected until the tolerance is met. Throws
/// Error("quadrature-nonconvergence") naming the worst subinterval when the
/// interval budget runs out.
AdaptiveResult integrate_adaptive(const Integrand& f, const std::vector<double>& breaks,
                                  const AdaptiveOptions& opts);

/// n-point trapezoid rule for a 2 pi-periodic integrand over [0, 2 pi).
template <class F>
auto periodic_trapezoid(F&& f, int n) -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  R sum{};
  const double h = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) {
    sum += f(i * h);
  }
  return sum * h;
}

}  // namespace qfgp::quad
