#include "qfgp/master_equation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "qfgp/error.hpp"

namespace qfgp {

namespace pauli {

const Matrix2& x() {
  static const Matrix2 m = (Matrix2() << 0, 1, 1, 0).finished();
  return m;
}

const Matrix2& y() {
  using C = std::complex<double>;
  static const Matrix2 m = (Matrix2() << 0, C(0, -1), C(0, 1), 0).finished();
  return m;
}

const Matrix2& z() {
  static const Matrix2 m = (Matrix2() << 1, 0, 0, -1).finished();
  return m;
}

}  // namespace pauli

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector bloch_of(const Matrix2& rho) {
  return {2.0 * rho(1, 0).real(), 2.0 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

Matrix2 density_from_bloch(const BlochVector& r) {
  const Matrix2 id = Matrix2::Identity();
  return 0.5 * (id + r.x * pauli::x() + r.y * pauli::y() + r.z * pauli::z());
}

double purity(const Matrix2& rho) { return (rho * rho).trace().real(); }

double hermiticity_error(const Matrix2& rho) {
  return std::max({std::abs(rho(0, 1) - std::conj(rho(1, 0))), std::abs(rho(0, 0).imag()),
                   std::abs(rho(1, 1).imag())});
}

Spinor initial_spinor(double theta0) {
  Spinor psi;
  psi << std::sin(theta0), std::cos(theta0);
  return psi;
}

Matrix2 initial_state(double theta0) {
  const Spinor psi = initial_spinor(theta0);
  return psi * psi.adjoint();
}

CoefficientTable::CoefficientTable(const KernelTable& kernels, double delta_ratio)
    : dt_(kernels.dt), t_(kernels.t) {
  const std::size_t n = t_.size();
  D_.assign(n, 0.0);
  f_.assign(n, 0.0);
  zeta_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double h = 0.5 * (t_[i] - t_[i - 1]);
    const double c0 = std::cos(delta_ratio * t_[i - 1]), c1 = std::cos(delta_ratio * t_[i]);
    const double s0 = std::sin(delta_ratio * t_[i - 1]), s1 = std::sin(delta_ratio * t_[i]);
    D_[i] = D_[i - 1] + h * (kernels.nu[i - 1] * c0 + kernels.nu[i] * c1);
    f_[i] = f_[i - 1] + h * (kernels.nu[i - 1] * s0 + kernels.nu[i] * s1);
    zeta_[i] = zeta_[i - 1] - h * (kernels.eta[i - 1] * s0 + kernels.eta[i] * s1);
  }
}

Coefficients CoefficientTable::at(double t) const {
  if (t_.empty()) {
    return {t, 0.0, 0.0, 0.0};
  }
  if (t <= 0.0) {
    return {t, D_.front(), f_.front(), zeta_.front()};
  }
  if (t >= t_.back()) {
    return {t, D_.back(), f_.back(), zeta_.back()};
  }
  std::size_t i = std::min(static_cast<std::size_t>(t / dt_), t_.size() - 2);
  // Guard against rounding in t / dt at grid points.
  while (i > 0 && t < t_[i]) --i;
  while (i + 2 < t_.size() && t >= t_[i + 1]) ++i;
  const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
  auto lerp = [&](const std::vector<double>& v) { return v[i] + w * (v[i + 1] - v[i]); };
  return {t, lerp(D_), lerp(f_), lerp(zeta_)};
}

Coefficients coefficients(const KernelTable& kernels, double delta_ratio, double t) {
  if (t < 0.0 || t > kernels.t_end()) {
    std::ostringstream os;
    os << "time " << t << " outside kernel table range [0, " << kernels.t_end() << "]";
    throw Error("out-of-range", os.str());
  }
  return CoefficientTable(kernels, delta_ratio).at(t);
}

Matrix2 rhs(const Matrix2& rho, const Coefficients& c, double delta_ratio) {
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  const Matrix2& sx = pauli::x();
  const Matrix2& sy = pauli::y();
  const Matrix2 H = 0.5 * delta_ratio * pauli::z();
  auto comm = [](const Matrix2& a, const Matrix2& b) -> Matrix2 { return a * b - b * a; };
  auto anti = [](const Matrix2& a, const Matrix2& b) -> Matrix2 { return a * b + b * a; };
  return -i * comm(H, rho) - c.D * comm(sx, comm(sx, rho)) - c.f * comm(sx, comm(sy, rho)) +
         i * c.zeta * comm(sx, anti(sy, rho));
}

BlochVector bloch_rhs(const BlochVector& r, const Coefficients& c, double delta_ratio) {
  return {-delta_ratio * r.y, delta_ratio * r.x - 4.0 * c.D * r.y + 4.0 * c.f * r.x,
          -4.0 * c.D * r.z - 4.0 * c.zeta};
}

namespace {

using State = std::array<double, 8>;

State pack(const Matrix2& m) {
  return {m(0, 0).real(), m(0, 0).imag(), m(0, 1).real(), m(0, 1).imag(),
          m(1, 0).real(), m(1, 0).imag(), m(1, 1).real(), m(1, 1).imag()};
}

Matrix2 unpack(const State& s) {
  Matrix2 m;
  m << std::complex<double>(s[0], s[1]), std::complex<double>(s[2], s[3]),
      std::complex<double>(s[4], s[5]), std::complex<double>(s[6], s[7]);
  return m;
}

// Free propagator exp(-i delta sz t / 2).
Matrix2 free_propagator(double delta, double t) {
  Matrix2 u = Matrix2::Zero();
  u(0, 0) = std::polar(1.0, -0.5 * delta * t);
  u(1, 1) = std::polar(1.0, 0.5 * delta * t);
  return u;
}

// Interaction picture: the state rho_I = U^dag rho U only feels the
// environment terms, so free precession is exact.
struct MasterEquation {
  const CoefficientTable* table;
  double delta;

  void operator()(const State& x, State& dxdt, double t) const {
    const Matrix2 u = free_propagator(delta, t);
    const Matrix2 rho = u * unpack(x) * u.adjoint();
    dxdt = pack(u.adjoint() * rhs(rho, table->at(t), 0.0) * u);
  }
};

Matrix2 to_lab(const State& x, double delta, double t) {
  const Matrix2 u = free_propagator(delta, t);
  return u * unpack(x) * u.adjoint();
}

TrajectorySample make_sample(double t, const Matrix2& raw, double guard) {
  TrajectorySample s;
  s.t = t;
  s.hermiticity_error = hermiticity_error(raw);
  const std::complex<double> tr = raw.trace();
  s.trace_error = std::abs(tr - 1.0);
  Matrix2 sym = 0.5 * (raw + raw.adjoint());
  sym /= sym.trace().real();
  s.rho = sym;
  s.purity = purity(sym);
  if (s.purity > 1.0 + guard) {
    std::ostringstream os;
    os.precision(12);
    os << "purity " << s.purity << " exceeds 1 at t = " << t
       << "; coupling too strong for the weak-coupling master equation";
    throw Error("purity-excursion", os.str());
  }
  return s;
}

}  // namespace

Trajectory evolve(const SystemParams& sys, const GeometryConfig& geo, const KernelTable& kernels,
                  int n_cycles, const IntegratorOptions& opts) {
  validate(sys);
  if (n_cycles < 1) {
    throw Error("validation", "n_cycles must be >= 1");
  }
  if (opts.samples_per_cycle < 4) {
    throw Error("validation", "samples_per_cycle must be >= 4");
  }
  const double period = sys.period();
  const double horizon = n_cycles * period;
  if (kernels.t_end() < horizon * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "kernel table ends at t = " << kernels.t_end() << " but " << n_cycles
       << " cycles need t = " << horizon;
    throw Error("table-coverage", os.str());
  }

  Trajectory traj;
  traj.system = sys;
  traj.geometry = geo;
  traj.table_digest = kernels.config_hash;
  traj.period = period;
  traj.samples_per_cycle = opts.samples_per_cycle;
  traj.n_cycles = n_cycles;
  traj.options = opts;

  const CoefficientTable table(kernels, sys.delta_ratio);
  const MasterEquation system{&table, sys.delta_ratio};

  const std::size_t n_samples = static_cast<std::size_t>(n_cycles) * opts.samples_per_cycle + 1;
  auto sample_time = [&](std::size_t j) {
    return period * (static_cast<double>(j) / opts.samples_per_cycle);
  };

  namespace odeint = boost::numeric::odeint;
  auto stepper =
      odeint::make_dense_output(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
  State x = pack(initial_state(sys.theta0));
  stepper.initialize(x, 0.0, opts.initial_step);

  traj.samples.reserve(n_samples);
  traj.samples.push_back(make_sample(0.0, unpack(x), opts.purity_guard));

  std::size_t next = 1;
  while (next < n_samples) {
    const double target = sample_time(next);
    while (stepper.current_time() < target) {
      try {
        stepper.do_step(system);
      } catch (const odeint::step_adjustment_error&) {
        const double t = stepper.current_time();
        const Coefficients c = table.at(t);
        std::ostringstream os;
        os.precision(12);
        os << "step-size control failed at t = " << t << " (D = " << c.D << ", f = " << c.f
           << ", zeta = " << c.zeta << ")";
        throw Error("step-size-underflow", os.str());
      }
      if (stepper.current_time_step() < opts.min_step) {
        const double t = stepper.current_time();
        const Coefficients c = table.at(t);
        std::ostringstream os;
        os.precision(12);
        os << "step size " << stepper.current_time_step() << " below " << opts.min_step
           << " at t = " << t << " (D = " << c.D << ", f = " << c.f << ", zeta = " << c.zeta
           << ")";
        throw Error("step-size-underflow", os.str());
      }
    }
    while (next < n_samples && sample_time(next) <= stepper.current_time()) {
      const double t = sample_time(next);
      stepper.calc_state(t, x);
      traj.samples.push_back(make_sample(t, to_lab(x, sys.delta_ratio, t), opts.purity_guard));
      ++next;
    }
  }
  return traj;
}

}  // namespace qfgp
