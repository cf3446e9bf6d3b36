#pragma once

// Kinematic geometric phase of a mixed-state trajectory:
//
//   phi_g(t) = arg sum_k sqrt(eps_k(t) eps_k(0)) <k(0)|k(t)> exp(-int_0^t <k|d/ds k> ds)
//
// The exponential is discretised as the product of normalised overlaps
// <k(t_{j+1})|k(t_j)> over consecutive samples, which closes the Bargmann
// loop with <k(0)|k(t)> and makes the result independent of the phase of
// every stored eigenvector.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qfgp/kernel_cache.hpp"
#include "qfgp/master_equation.hpp"
#include "qfgp/simulation.hpp"

namespace qfgp {

struct EigenFrame {
  double t = 0.0;
  std::array<double, 2> eigenvalues{};  // branch order, not value order
  std::array<Spinor, 2> vectors;
};

struct EigenTrack {
  std::vector<EigenFrame> frames;
  int samples_per_cycle = 0;
};

/// Eigen-decomposes every sample. Branches start as (major, minor) and are
/// continued by maximal overlap with the previous sample. Throws
/// "degenerate-spectrum" when |eps_1 - eps_2| < 1e-12 and "overlap-break"
/// when a branch's consecutive overlap drops to 0.99 or below.
EigenTrack eigentrack(std::span<const double> times, std::span<const Matrix2> states,
                      int samples_per_cycle = 0);
EigenTrack eigentrack(const Trajectory& traj);

/// Unwrapped phase at every frame of the track.
std::vector<double> phase_history(const EigenTrack& track,
                                  PhaseMode mode = PhaseMode::continuous);

/// Unwrapped phase at the frame whose time equals `up_to`.
double geometric_phase(const EigenTrack& track, double up_to,
                       PhaseMode mode = PhaseMode::continuous);

/// Phase read at every cycle boundary N = 1..n_cycles (index N - 1).
std::vector<double> cycle_phases(const EigenTrack& track, int n_cycles,
                                 PhaseMode mode = PhaseMode::continuous);

/// Closed-form unitary phase pi (1 - cos angle).
double unitary_phase(double bloch_polar_angle);

struct PhaseRow {
  int cycle = 0;
  double phi_g = 0.0;
  double phi_c = 0.0;
  double delta_phi = 0.0;           // phi_g - phi_c
  double delta_phi_static = 0.0;    // same, u = 0 run
  double delta_phi_velocity = 0.0;  // delta_phi - delta_phi_static
  double velocity_observable = 0.0; // |delta_phi| - |delta_phi_static|
};

struct PhaseSeries {
  std::vector<PhaseRow> rows;
  std::string digest_moving;   // kernel table digests of the three runs
  std::string digest_static;
  std::string digest_free;
  double bloch_polar_angle = 0.0;
  /// pi (1 - cos 2 theta0): the closed form on the actual Bloch circle.
  double phi_c_formula_bloch = 0.0;
  /// pi (1 - cos theta0): the same formula read with the amplitude angle.
  double phi_c_formula_theta0 = 0.0;
  double min_purity = 1.0;     // over the moving run
};

/// Evolves the moving (u), static (u = 0) and free (g = 0) configurations
/// and assembles the per-cycle phases and their decomposition.
PhaseSeries phase_series(const SimulationConfig& cfg, int n_cycles, KernelCache& cache,
                         int workers = 1);

/// Uses cfg.n_cycles.
PhaseSeries phase_series(const SimulationConfig& cfg, KernelCache& cache, int workers = 1);

}  // namespace qfgp
