#include "qfgp/geometric_phase.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qfgp/error.hpp"
#include "qfgp/parallel.hpp"

namespace qfgp {

namespace {

constexpr double kDegeneracyGap = 1e-12;
constexpr double kMinOverlap = 0.99;
// Eigenvalues below this are roundoff on a pure state.
constexpr double kEigenvalueFloor = 1e-13;

double population(double e) { return e < kEigenvalueFloor ? 0.0 : e; }

double wrap_to_pi(double x) {
  x = std::remainder(x, 2.0 * kPi);
  return x;
}

}  // namespace

EigenTrack eigentrack(std::span<const double> times, std::span<const Matrix2> states,
                      int samples_per_cycle) {
  if (times.size() != states.size()) {
    throw Error("validation", "eigentrack: times and states differ in length");
  }
  EigenTrack track;
  track.samples_per_cycle = samples_per_cycle;
  track.frames.reserve(states.size());

  Eigen::SelfAdjointEigenSolver<Matrix2> solver;
  for (std::size_t n = 0; n < states.size(); ++n) {
    solver.compute(states[n]);
    const auto& vals = solver.eigenvalues();  // ascending
    const auto& vecs = solver.eigenvectors();
    if (std::abs(vals(1) - vals(0)) < kDegeneracyGap) {
      std::ostringstream os;
      os.precision(12);
      os << "degenerate density-matrix spectrum at t = " << times[n] << " (eigenvalues "
         << vals(0) << ", " << vals(1) << ")";
      throw Error("degenerate-spectrum", os.str());
    }
    EigenFrame frame;
    frame.t = times[n];
    if (n == 0) {
      frame.eigenvalues = {vals(1), vals(0)};
      frame.vectors = {vecs.col(1), vecs.col(0)};
    } else {
      const EigenFrame& prev = track.frames.back();
      const double keep = std::abs(prev.vectors[0].dot(vecs.col(1))) +
                          std::abs(prev.vectors[1].dot(vecs.col(0)));
      const double swap = std::abs(prev.vectors[0].dot(vecs.col(0))) +
                          std::abs(prev.vectors[1].dot(vecs.col(1)));
      if (keep >= swap) {
        frame.eigenvalues = {vals(1), vals(0)};
        frame.vectors = {vecs.col(1), vecs.col(0)};
      } else {
        frame.eigenvalues = {vals(0), vals(1)};
        frame.vectors = {vecs.col(0), vecs.col(1)};
      }
      for (int k = 0; k < 2; ++k) {
        const double overlap = std::abs(prev.vectors[k].dot(frame.vectors[k]));
        if (overlap <= kMinOverlap) {
          std::ostringstream os;
          os << "eigenvector branch " << k << " overlap " << overlap << " between t = " << prev.t
             << " and t = " << frame.t << "; sample more densely";
          throw Error("overlap-break", os.str());
        }
      }
    }
    track.frames.push_back(std::move(frame));
  }
  return track;
}

EigenTrack eigentrack(const Trajectory& traj) {
  std::vector<double> times;
  std::vector<Matrix2> states;
  times.reserve(traj.samples.size());
  states.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    times.push_back(s.t);
    states.push_back(s.rho);
  }
  return eigentrack(times, states, traj.samples_per_cycle);
}

namespace {

// Unwrapped phase relative to frame `ref`, for frames ref..last inclusive,
// written into out[ref..last].
void chain_phases(const EigenTrack& track, std::size_t ref, std::size_t last,
                  std::vector<double>& out) {
  const auto& frames = track.frames;
  const EigenFrame& f0 = frames[ref];
  std::array<std::complex<double>, 2> transport{1.0, 1.0};
  double previous_arg = 0.0;
  out[ref] = 0.0;
  for (std::size_t n = ref + 1; n <= last; ++n) {
    const EigenFrame& fn = frames[n];
    const EigenFrame& fp = frames[n - 1];
    std::complex<double> sum{};
    for (int k = 0; k < 2; ++k) {
      // <k(t_n)|k(t_{n-1})>: Eigen's dot() conjugates its left operand.
      const std::complex<double> link = fn.vectors[k].dot(fp.vectors[k]);
      const double mag = std::abs(link);
      if (mag > 0.0) transport[k] *= link / mag;
      const double weight = std::sqrt(population(fn.eigenvalues[k]) * population(f0.eigenvalues[k]));
      sum += weight * f0.vectors[k].dot(fn.vectors[k]) * transport[k];
    }
    const double arg = std::arg(sum);
    out[n] = out[n - 1] + wrap_to_pi(arg - previous_arg);
    previous_arg = arg;
  }
}

std::size_t frame_index(const EigenTrack& track, double t) {
  const auto& frames = track.frames;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    if (std::abs(frames[n].t - t) <= 1e-9 * (1.0 + std::abs(t))) return n;
  }
  std::ostringstream os;
  os << "time " << t << " is not a sample of the eigen track";
  throw Error("out-of-range", os.str());
}

}  // namespace

std::vector<double> phase_history(const EigenTrack& track, PhaseMode mode) {
  const std::size_t n = track.frames.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  if (mode == PhaseMode::continuous || track.samples_per_cycle <= 0) {
    chain_phases(track, 0, n - 1, out);
    return out;
  }
  const auto spc = static_cast<std::size_t>(track.samples_per_cycle);
  double offset = 0.0;
  for (std::size_t ref = 0; ref + 1 < n; ref += spc) {
    const std::size_t last = std::min(n - 1, ref + spc);
    std::vector<double> local(n, 0.0);
    chain_phases(track, ref, last, local);
    for (std::size_t j = ref + 1; j <= last; ++j) out[j] = offset + local[j];
    offset += local[last];
  }
  return out;
}

double geometric_phase(const EigenTrack& track, double up_to, PhaseMode mode) {
  const std::size_t idx = frame_index(track, up_to);
  EigenTrack prefix;
  prefix.samples_per_cycle = track.samples_per_cycle;
  prefix.frames.assign(track.frames.begin(), track.frames.begin() + static_cast<long>(idx) + 1);
  return phase_history(prefix, mode).back();
}

std::vector<double> cycle_phases(const EigenTrack& track, int n_cycles, PhaseMode mode) {
  if (track.samples_per_cycle <= 0) {
    throw Error("validation", "cycle_phases: track has no cycle structure");
  }
  const auto spc = static_cast<std::size_t>(track.samples_per_cycle);
  if (track.frames.size() < static_cast<std::size_t>(n_cycles) * spc + 1) {
    throw Error("out-of-range", "cycle_phases: track shorter than requested cycles");
  }
  const std::vector<double> history = phase_history(track, mode);
  std::vector<double> out;
  out.reserve(n_cycles);
  for (int c = 1; c <= n_cycles; ++c) out.push_back(history[static_cast<std::size_t>(c) * spc]);
  return out;
}

double unitary_phase(double bloch_polar_angle) {
  return kPi * (1.0 - std::cos(bloch_polar_angle));
}

namespace {

std::vector<double> run_phases(const SimulationConfig& cfg, const KernelTable& table,
                               int n_cycles, double* min_purity) {
  const Trajectory traj = evolve(cfg.system, cfg.geometry, table, n_cycles, cfg.numerics.integrator);
  if (min_purity) {
    double p = 1.0;
    for (const auto& s : traj.samples) p = std::min(p, s.purity);
    *min_purity = p;
  }
  return cycle_phases(eigentrack(traj), n_cycles, cfg.numerics.phase_mode);
}

}  // namespace

PhaseSeries phase_series(const SimulationConfig& cfg, int n_cycles, KernelCache& cache,
                         int workers) {
  SimulationConfig run = cfg;
  run.n_cycles = n_cycles;
  run.validate();

  SimulationConfig still = run;
  still.geometry.u = 0.0;
  SimulationConfig free_run = run;
  free_run.system.coupling_g = 0.0;

  const double t_max = run.table_t_max();
  const double dt = run.numerics.kernel_dt;
  const double delta = run.system.delta_ratio;

  std::array<KernelTable, 3> tables;
  std::array<std::vector<double>, 3> phases;
  double min_purity = 1.0;
  const bool moving = run.geometry.u != 0.0;

  // Tables first (the cache deduplicates), then the evolutions.
  auto table_for = [&](const SimulationConfig& c) {
    if (c.system.coupling_g == 0.0) return tabulate(c.kernel_config(), delta, t_max, dt);
    return cache.get(c.kernel_config(), delta, t_max, dt, workers);
  };
  tables[2] = table_for(free_run);
  tables[1] = table_for(still);
  tables[0] = moving ? table_for(run) : tables[1];

  const std::array<const SimulationConfig*, 3> configs{&run, &still, &free_run};
  const std::size_t n_runs = moving ? 3 : 2;
  parallel_for(n_runs, workers, [&](std::size_t i) {
    const std::size_t slot = moving ? i : i + 1;
    phases[slot] = run_phases(*configs[slot], tables[slot], n_cycles,
                              slot == (moving ? 0u : 1u) ? &min_purity : nullptr);
  });
  if (!moving) phases[0] = phases[1];

  PhaseSeries out;
  out.digest_moving = tables[0].config_hash;
  out.digest_static = tables[1].config_hash;
  out.digest_free = tables[2].config_hash;
  out.bloch_polar_angle = run.system.bloch_polar_angle();
  out.phi_c_formula_bloch = unitary_phase(out.bloch_polar_angle);
  out.phi_c_formula_theta0 = unitary_phase(run.system.theta0);
  out.min_purity = min_purity;
  out.rows.reserve(n_cycles);
  for (int c = 0; c < n_cycles; ++c) {
    PhaseRow row;
    row.cycle = c + 1;
    row.phi_g = phases[0][c];
    row.phi_c = phases[2][c];
    row.delta_phi = row.phi_g - row.phi_c;
    row.delta_phi_static = phases[1][c] - row.phi_c;
    row.delta_phi_velocity = row.delta_phi - row.delta_phi_static;
    row.velocity_observable = std::abs(row.delta_phi) - std::abs(row.delta_phi_static);
    out.rows.push_back(row);
  }
  return out;
}

PhaseSeries phase_series(const SimulationConfig& cfg, KernelCache& cache, int workers) {
  return phase_series(cfg, cfg.n_cycles, cache, workers);
}

}  // namespace qfgp
