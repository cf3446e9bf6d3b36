#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "qfgp/error.hpp"
#include "qfgp/master_equation.hpp"
#include "qfgp/simulation.hpp"
#include "qfgp/sweep.hpp"

using namespace qfgp;

namespace {

Matrix2 random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  BlochVector r{d(rng), d(rng), d(rng)};
  const double n = r.norm();
  if (n > 1.0) {
    r.x /= n * 1.01;
    r.y /= n * 1.01;
    r.z /= n * 1.01;
  }
  return density_from_bloch(r);
}

SimulationConfig metal_config(double g, double u) {
  SimulationConfig c = figure_base();
  c.system.coupling_g = g;
  c.geometry.u = u;
  return c;
}

KernelTable table_for(const SimulationConfig& c) {
  return tabulate(c.kernel_config(), c.system.delta_ratio, c.table_t_max(), c.numerics.kernel_dt, 4);
}

}  // namespace

TEST_CASE("pauli matrices and bloch conversions") {
  const Matrix2 e = initial_state(kPi / 2 - 1e-9);
  CHECK(bloch_of(e).z == doctest::Approx(1.0));
  CHECK(bloch_of(initial_state(1e-9)).z == doctest::Approx(-1.0));
  CHECK((pauli::x() * pauli::y() - pauli::y() * pauli::x() - 2.0 * std::complex<double>(0, 1) * pauli::z())
            .norm() < 1e-15);

  const Matrix2 rho = initial_state(0.3);
  const BlochVector b = bloch_of(rho);
  CHECK(b.x == doctest::Approx(std::sin(0.6)));
  CHECK(b.y == doctest::Approx(0.0));
  CHECK(b.z == doctest::Approx(-std::cos(0.6)));
  CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((density_from_bloch(b) - rho).norm() < 1e-15);
}

TEST_CASE("rhs is traceless and leaves the ground state alone") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int i = 0; i < 200; ++i) {
    const Matrix2 rho = random_state(rng);
    const Coefficients c{0.0, d(rng), d(rng), d(rng)};
    CHECK(std::abs(rhs(rho, c, 0.9).trace()) < 1e-15);
  }
  Matrix2 ground = Matrix2::Zero();
  ground(1, 1) = 1.0;
  CHECK(rhs(ground, {}, 0.9).norm() == 0.0);
}

TEST_CASE("matrix and bloch generators agree") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int i = 0; i < 200; ++i) {
    const Matrix2 rho = random_state(rng);
    const Coefficients c{0.0, d(rng), d(rng), d(rng)};
    const double delta = 0.5 + d(rng);
    const BlochVector r = bloch_of(rho);
    const BlochVector m = bloch_of(rhs(rho, c, delta));
    const BlochVector b = bloch_rhs(r, c, delta);
    const auto o = oracle::bloch_generator({r.x, r.y, r.z}, c.D, c.f, c.zeta, delta);
    CHECK(std::abs(m.x - o[0]) < 1e-13);
    CHECK(std::abs(m.y - o[1]) < 1e-13);
    CHECK(std::abs(m.z - o[2]) < 1e-13);
    CHECK(std::abs(b.x - o[0]) < 1e-13);
    CHECK(std::abs(b.y - o[1]) < 1e-13);
    CHECK(std::abs(b.z - o[2]) < 1e-13);
  }
}

TEST_CASE("coefficients") {
  const SimulationConfig cfg = metal_config(1e-2, 0.01);
  const KernelTable k = table_for(cfg);
  const double delta = cfg.system.delta_ratio;
  const CoefficientTable table(k, delta);

  const Coefficients c0 = coefficients(k, delta, 0.0);
  CHECK(c0.D == 0.0);
  CHECK(c0.f == 0.0);
  CHECK(c0.zeta == 0.0);

  const auto D = oracle::cumulative(k.t, k.nu, delta, false);
  const auto f = oracle::cumulative(k.t, k.nu, delta, true);
  auto z = oracle::cumulative(k.t, k.eta, delta, true);
  for (double& v : z) v = -v;
  double worst = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    worst = std::max({worst, std::abs(table.D()[i] - D[i]), std::abs(table.f()[i] - f[i]),
                      std::abs(table.zeta()[i] - z[i])});
  }
  CHECK(worst < 1e-14);

  // short times: D ~ nu(0) t while f is second order
  for (double t : {0.2 * k.dt, 0.01 / delta, k.dt}) {
    CHECK(table.at(t).D == doctest::Approx(k.nu[0] * t).epsilon(1e-2));
    CHECK(std::abs(table.at(t).f) < 0.1 * std::abs(table.at(t).D));
  }

  const Coefficients mid = table.at(0.5 * (k.t[3] + k.t[4]));
  CHECK(mid.D == doctest::Approx(0.5 * (table.D()[3] + table.D()[4])));

  CHECK_THROWS_AS(coefficients(k, delta, k.t_end() + 1.0), Error);
  CHECK_THROWS_AS(coefficients(k, delta, -1.0), Error);

  SimulationConfig off = cfg;
  off.system.coupling_g = 0.0;
  const CoefficientTable zero(table_for(off), delta);
  for (std::size_t i = 0; i < zero.size(); i += 50) {
    CHECK(zero.D()[i] == 0.0);
    CHECK(zero.f()[i] == 0.0);
    CHECK(zero.zeta()[i] == 0.0);
  }
}

TEST_CASE("free evolution is periodic and pure") {
  SimulationConfig cfg = metal_config(0.0, 0.007);
  const KernelTable k = table_for(cfg);
  const Trajectory traj = evolve(cfg.system, cfg.geometry, k, 3);
  REQUIRE(traj.samples.size() == static_cast<std::size_t>(3 * traj.samples_per_cycle + 1));
  const BlochVector start = bloch_of(traj.samples.front().rho);
  for (int n = 1; n <= 3; ++n) {
    const BlochVector r = bloch_of(traj.samples[n * traj.samples_per_cycle].rho);
    CHECK(std::abs(r.x - start.x) < 1e-8);
    CHECK(std::abs(r.y - start.y) < 1e-8);
    CHECK(std::abs(r.z - start.z) < 1e-8);
  }
  double worst = 0.0;
  for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.purity - 1.0));
  CHECK(worst < 1e-10);
  CHECK(traj.samples.back().t == doctest::Approx(3 * cfg.system.period()));
}

TEST_CASE("adaptive integrator against fixed-step RK4") {
  const SimulationConfig cfg = metal_config(kCalibratedCoupling, 0.007);
  const KernelTable k = table_for(cfg);
  const double delta = cfg.system.delta_ratio;
  const CoefficientTable c(k, delta);
  const int cycles = 30;
  const double period = cfg.system.period();

  const Trajectory traj = evolve(cfg.system, cfg.geometry, k, cycles);

  // RK4 at h and h/2 sampled every kernel_dt; compare at the kernel grid
  // point nearest each cycle boundary.
  const double dt = cfg.numerics.kernel_dt;
  const double t_end = std::ceil(cycles * period / dt) * dt;
  const auto a = oracle::rk4_bloch(c, delta, cfg.system.theta0, dt / 8, t_end, dt);
  const auto b = oracle::rk4_bloch(c, delta, cfg.system.theta0, dt / 16, t_end, dt);
  double self = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int j = 0; j < 3; ++j) self = std::max(self, std::abs(a[i][j] - b[i][j]));
  }
  CHECK(self < 1e-8);

  // cycle ends are off the kernel grid, rerun RK4 to land on them exactly
  double worst = 0.0;
  for (int n = 1; n <= cycles; n += 7) {
    const double tn = n * period;
    const auto r = oracle::rk4_bloch(c, delta, cfg.system.theta0, tn / std::ceil(tn / (dt / 16)), tn, tn);
    const BlochVector s = bloch_of(traj.samples[n * traj.samples_per_cycle].rho);
    worst = std::max({worst, std::abs(r.back()[0] - s.x), std::abs(r.back()[1] - s.y),
                      std::abs(r.back()[2] - s.z)});
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("purity decays slowly for the perpendicular-sheet metal") {
  const SimulationConfig cfg = metal_config(kCalibratedCoupling, 0.007);
  const KernelTable k = table_for(cfg);
  const Trajectory traj = evolve(cfg.system, cfg.geometry, k, 30);
  const int spc = traj.samples_per_cycle;
  std::vector<double> per_cycle_min;
  for (int n = 0; n < 30; ++n) {
    double m = 1.0;
    for (int i = n * spc; i <= (n + 1) * spc; ++i) m = std::min(m, traj.samples[i].purity);
    per_cycle_min.push_back(m);
  }
  CHECK(per_cycle_min.back() < per_cycle_min.front());
  double trace = 0.0, herm = 0.0;
  for (const auto& s : traj.samples) {
    trace = std::max(trace, s.trace_error);
    herm = std::max(herm, s.hermiticity_error);
  }
  CHECK(trace < 1e-9);
  CHECK(herm < 1e-10);
}

TEST_CASE("evolve validates its inputs") {
  const SimulationConfig cfg = metal_config(1e-3, 0.0);
  const KernelTable k = table_for(cfg);
  CHECK_THROWS_AS(evolve(cfg.system, cfg.geometry, k, 0), Error);
  CHECK_THROWS_AS(evolve(cfg.system, cfg.geometry, k, 40), Error);
  IntegratorOptions o;
  o.samples_per_cycle = 2;
  CHECK_THROWS_AS(evolve(cfg.system, cfg.geometry, k, 1, o), Error);
}
