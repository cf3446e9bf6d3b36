#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "../oracles.hpp"
#include "qfgp/error.hpp"
#include "qfgp/geometric_phase.hpp"
#include "qfgp/sweep.hpp"

using namespace qfgp;

namespace {

// Exact free precession of a Bloch vector of length r at polar angle theta_b
// (measured from the ground pole).
struct Path {
  std::vector<double> t;
  std::vector<Matrix2> rho;
};

Path precession(double theta_b, double r, int per_cycle, int cycles, double delta = 0.9) {
  Path p;
  const double period = 2 * kPi / delta;
  for (int i = 0; i <= per_cycle * cycles; ++i) {
    const double t = period * i / per_cycle;
    const double a = delta * t;
    p.t.push_back(t);
    p.rho.push_back(density_from_bloch(
        {r * std::sin(theta_b) * std::cos(a), r * std::sin(theta_b) * std::sin(a), -r * std::cos(theta_b)}));
  }
  return p;
}

double mixed_unitary_phase(double theta_b, double r) {
  const double g = kPi * (1 - std::cos(theta_b));
  return std::atan2(r * std::sin(g), std::cos(g));
}

Matrix2 random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix2 a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = {n(rng), n(rng)};
  Eigen::HouseholderQR<Matrix2> qr(a);
  return qr.householderQ();
}

SimulationConfig quick(double g, double u, int spc = 2000) {
  SimulationConfig c = figure_base();
  c.system.coupling_g = g;
  c.geometry.u = u;
  c.numerics.integrator.samples_per_cycle = spc;
  return c;
}

}  // namespace

TEST_CASE("closed-form unitary phase") {
  CHECK(unitary_phase(kPi / 2) == doctest::Approx(kPi));
  CHECK(unitary_phase(0.0) == 0.0);
  CHECK(unitary_phase(kPi / 3) == doctest::Approx(kPi / 2));
}

TEST_CASE("pure trajectory eigenvalues") {
  const Path p = precession(1.0, 1.0, 64, 1);
  const EigenTrack track = eigentrack(p.t, p.rho, 64);
  for (const auto& f : track.frames) {
    CHECK(f.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.eigenvalues[1]) < 1e-12);
  }
}

TEST_CASE("degenerate spectrum is rejected") {
  Path p = precession(1.0, 0.9, 64, 1);
  p.rho[10] = Matrix2::Identity() / 2.0;
  try {
    eigentrack(p.t, p.rho, 64);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == "degenerate-spectrum");
  }
}

TEST_CASE("mixed eigenvalues match the bloch-norm closed form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-0.6, 0.6);
  std::vector<double> t;
  std::vector<Matrix2> s;
  for (int i = 0; i < 50; ++i) {
    t.push_back(i);
    s.push_back(density_from_bloch({0.8 + 0.001 * d(rng), 0.001 * d(rng), 0.3 + 0.001 * d(rng)}));
  }
  const EigenTrack track = eigentrack(t, s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto e = oracle::bloch_eigenvalues(s[i]);
    CHECK(std::abs(track.frames[i].eigenvalues[0] - e[0]) < 1e-12);
    CHECK(std::abs(track.frames[i].eigenvalues[1] - e[1]) < 1e-12);
  }
}

TEST_CASE("unitary precession phases") {
  for (double deg : {30.0, 60.0, 90.0, 120.0}) {
    const double tb = deg * kPi / 180;
    const Path p = precession(tb, 1.0, 4000, 1);
    const EigenTrack track = eigentrack(p.t, p.rho, 4000);
    const double phi = geometric_phase(track, p.t.back());
    const double ref = unitary_phase(tb);
    CHECK(std::abs(std::remainder(phi - ref, 2 * kPi)) < 1e-6);
  }
  const Path eq = precession(kPi / 2, 1.0, 512, 1);
  CHECK(std::abs(geometric_phase(eigentrack(eq.t, eq.rho, 512), eq.t.back()) - kPi) < 1e-12);
}

TEST_CASE("mixed unitary precession") {
  for (double r : {0.95, 0.8, 0.5}) {
    for (double deg : {40.0, 75.0, 110.0}) {
      const double tb = deg * kPi / 180;
      const Path p = precession(tb, r, 4000, 1);
      const double phi = geometric_phase(eigentrack(p.t, p.rho, 4000), p.t.back());
      CHECK(std::abs(std::remainder(phi - mixed_unitary_phase(tb, r), 2 * kPi)) < 1e-6);
    }
  }
}

TEST_CASE("chain is second order in the sample spacing") {
  const double tb = 1.1;
  double prev = 0.0;
  for (int n : {64, 128, 256, 512}) {
    const Path p = precession(tb, 0.9, n, 1);
    const double err =
        std::abs(geometric_phase(eigentrack(p.t, p.rho, n), p.t.back()) - mixed_unitary_phase(tb, 0.9));
    if (prev > 0.0) CHECK(prev / err > 3.0);
    prev = err;
  }
}

TEST_CASE("multi-cycle accumulation modes") {
  const double tb = 0.9;
  const Path p = precession(tb, 1.0, 2000, 4);
  const EigenTrack track = eigentrack(p.t, p.rho, 2000);
  const auto cont = cycle_phases(track, 4, PhaseMode::continuous);
  const auto per = cycle_phases(track, 4, PhaseMode::per_cycle);
  for (int n = 1; n <= 4; ++n) {
    CHECK(cont[n - 1] == doctest::Approx(n * unitary_phase(tb)).epsilon(1e-6));
    CHECK(per[n - 1] == doctest::Approx(n * unitary_phase(tb)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(geometric_phase(track, 0.123), Error);
}

TEST_CASE("gauge and basis invariance on a dissipative trajectory") {
  SimulationConfig c = figure2_base();
  c.numerics.integrator.samples_per_cycle = 2000;
  const KernelTable k = tabulate(c.kernel_config(), c.system.delta_ratio, c.table_t_max(),
                                 c.numerics.kernel_dt, 4);
  const Trajectory traj = evolve(c.system, c.geometry, k, 3, c.numerics.integrator);
  EigenTrack track = eigentrack(traj);
  const double t_end = track.frames.back().t;
  const double phi = geometric_phase(track, t_end);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
  for (int trial = 0; trial < 5; ++trial) {
    EigenTrack g = track;
    for (auto& f : g.frames)
      for (auto& v : f.vectors) v *= std::polar(1.0, ang(rng));
    CHECK(std::abs(geometric_phase(g, t_end) - phi) < 1e-12);

    const Matrix2 u = random_unitary(rng);
    std::vector<double> times;
    std::vector<Matrix2> states;
    for (const auto& s : traj.samples) {
      times.push_back(s.t);
      states.push_back(u * s.rho * u.adjoint());
    }
    CHECK(std::abs(geometric_phase(eigentrack(times, states, traj.samples_per_cycle), t_end) - phi) < 1e-10);
  }
}

TEST_CASE("phase series decomposition") {
  KernelCache cache;
  const PhaseSeries free = phase_series(quick(0.0, 0.01), 3, cache);
  for (const PhaseRow& r : free.rows) CHECK(std::abs(r.delta_phi) < 1e-8);

  const PhaseSeries still = phase_series(quick(5e-3, 0.0), 3, cache);
  for (const PhaseRow& r : still.rows) {
    CHECK(r.delta_phi_velocity == 0.0);
    CHECK(r.delta_phi != 0.0);
  }

  const PhaseSeries moving = phase_series(quick(5e-3, 0.02), 3, cache);
  REQUIRE(moving.rows.size() == 3);
  CHECK(moving.digest_moving != moving.digest_static);
  CHECK(moving.bloch_polar_angle == doctest::Approx(2 * 44.9 * kPi / 180));
  for (std::size_t i = 0; i < 3; ++i) {
    const PhaseRow& r = moving.rows[i];
    CHECK(r.cycle == static_cast<int>(i) + 1);
    CHECK(r.phi_c == doctest::Approx((i + 1) * moving.phi_c_formula_bloch).epsilon(1e-6));
    CHECK(r.delta_phi_static == doctest::Approx(still.rows[i].delta_phi).epsilon(1e-12));
    CHECK(r.delta_phi_velocity == doctest::Approx(r.delta_phi - r.delta_phi_static));
    CHECK(r.velocity_observable == doctest::Approx(std::abs(r.delta_phi) - std::abs(r.delta_phi_static)));
  }
  CHECK(moving.min_purity < 1.0);

  const PhaseSeries fine = phase_series(quick(5e-3, 0.02, 4000), 3, cache);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(fine.rows[i].phi_g - moving.rows[i].phi_g) < 1e-6);

  const PhaseSeries again = phase_series(quick(5e-3, 0.02), 3, cache, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.rows[i].phi_g == moving.rows[i].phi_g);
}
