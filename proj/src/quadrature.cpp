#include "qfgp/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qfgp/error.hpp"

namespace qfgp::quad {

namespace {

struct Rule {
  // Non-negative Kronrod abscissae, x[0] = 0. Gauss nodes sit at odd indices.
  std::array<double, 11> x{};
  std::array<double, 11> wk{};
  std::array<double, 11> wg{};
};

const Rule& gk21() {
  static const Rule rule = [] {
    Rule r;
    const auto& kx = boost::math::quadrature::gauss_kronrod<double, 21>::abscissa();
    const auto& kw = boost::math::quadrature::gauss_kronrod<double, 21>::weights();
    const auto& gw = boost::math::quadrature::gauss<double, 10>::weights();
    for (std::size_t i = 0; i < 11; ++i) {
      r.x[i] = kx[i];
      r.wk[i] = kw[i];
      r.wg[i] = (i % 2 == 1) ? gw[i / 2] : 0.0;
    }
    return r;
  }();
  return rule;
}

struct Segment {
  double a, b;
  std::complex<double> value;
  double error;
  double l1;
};

struct ByError {
  bool operator()(const Segment& l, const Segment& r) const {
    if (l.error != r.error) return l.error < r.error;
    return l.a > r.a;  // deterministic tie-break
  }
};

Segment apply_rule(const Integrand& f, double a, double b, std::size_t& evals) {
  const Rule& r = gk21();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const std::complex<double> fc = f(c);
  std::complex<double> kron = r.wk[0] * fc;
  std::complex<double> gauss{};
  double l1 = r.wk[0] * std::abs(fc);
  for (std::size_t i = 1; i < 11; ++i) {
    const std::complex<double> fl = f(c - h * r.x[i]);
    const std::complex<double> fr = f(c + h * r.x[i]);
    kron += r.wk[i] * (fl + fr);
    gauss += r.wg[i] * (fl + fr);
    l1 += r.wk[i] * (std::abs(fl) + std::abs(fr));
  }
  evals += 21;
  Segment s;
  s.a = a;
  s.b = b;
  s.value = kron * h;
  s.error = std::abs((kron - gauss) * h);
  s.l1 = l1 * std::abs(h);
  return s;
}

}  // namespace

AdaptiveResult integrate_adaptive(const Integrand& f, const std::vector<double>& breaks,
                                  const AdaptiveOptions& opts) {
  AdaptiveResult out;
  if (breaks.size() < 2) {
    return out;
  }
  std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
  std::complex<double> total{};
  double err = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    Segment s = apply_rule(f, breaks[i], breaks[i + 1], out.evaluations);
    total += s.value;
    err += s.error;
    l1 += s.l1;
    heap.push(s);
  }

  auto converged = [&] { return err <= std::max(opts.abs_tol, opts.rel_tol * l1); };

  while (!converged()) {
    if (heap.size() >= opts.max_intervals) {
      const Segment& worst = heap.top();
      std::ostringstream os;
      os.precision(10);
      os << "adaptive quadrature did not reach tolerance " << opts.rel_tol << " within "
         << opts.max_intervals << " subintervals; error " << err << " vs L1 norm " << l1
         << "; worst subinterval [" << worst.a << ", " << worst.b << "] with error "
         << worst.error;
      throw Error("quadrature-nonconvergence", os.str());
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = apply_rule(f, worst.a, mid, out.evaluations);
    Segment right = apply_rule(f, mid, worst.b, out.evaluations);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from the final partition in left-to-right order so the result does
  // not carry the running-update rounding.
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
  out.value = {};
  out.error = 0.0;
  out.l1_norm = 0.0;
  for (const Segment& s : segs) {
    out.value += s.value;
    out.error += s.error;
    out.l1_norm += s.l1;
  }
  out.intervals = segs.size();
  return out;
}

}  // namespace qfgp::quad
