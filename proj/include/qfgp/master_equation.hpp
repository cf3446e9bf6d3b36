#pragma once

// Reduced dynamics of the two-level atom,
//
//   d rho/dt = -i [H, rho] - D [sx,[sx,rho]] - f [sx,[sy,rho]] + i zeta [sx,{sy,rho}],
//
// with H = Delta sz / 2 in reduced units. Basis index 0 is |e> (Bloch +z),
// index 1 is |g> (Bloch -z).

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfgp/kernel.hpp"
#include "qfgp/params.hpp"

namespace qfgp {

using Matrix2 = Eigen::Matrix2cd;
using Spinor = Eigen::Vector2cd;

namespace pauli {
const Matrix2& x();
const Matrix2& y();
const Matrix2& z();
}  // namespace pauli

struct BlochVector {
  double x = 0.0, y = 0.0, z = 0.0;
  double norm() const;
};

BlochVector bloch_of(const Matrix2& rho);
Matrix2 density_from_bloch(const BlochVector& r);
double purity(const Matrix2& rho);
/// max(|rho01 - conj(rho10)|, |Im rho00|, |Im rho11|).
double hermiticity_error(const Matrix2& rho);

/// |psi0> = cos(theta0)|g> + sin(theta0)|e>.
Spinor initial_spinor(double theta0);
Matrix2 initial_state(double theta0);

/// Time-convolutionless coefficients at one instant.
struct Coefficients {
  double t = 0.0;
  double D = 0.0;
  double f = 0.0;
  double zeta = 0.0;
};

/// Cumulative-trapezoid coefficients on the kernel grid:
///   D(t)    =  int_0^t nu(s)  cos(Delta s) ds
///   f(t)    =  int_0^t nu(s)  sin(Delta s) ds
///   zeta(t) = -int_0^t eta(s) sin(Delta s) ds
/// Queries between grid points are linearly interpolated; queries past the
/// last grid point hold its value (only the final adaptive step can land
/// there, evolve() checks coverage of the requested horizon).
class CoefficientTable {
 public:
  CoefficientTable(const KernelTable& kernels, double delta_ratio);

  Coefficients at(double t) const;
  double t_end() const { return t_.empty() ? 0.0 : t_.back(); }
  std::size_t size() const { return t_.size(); }
  const std::vector<double>& D() const { return D_; }
  const std::vector<double>& f() const { return f_; }
  const std::vector<double>& zeta() const { return zeta_; }

 private:
  double dt_ = 0.0;
  std::vector<double> t_, D_, f_, zeta_;
};

/// Coefficients at t read from a kernel table; out-of-range times throw.
Coefficients coefficients(const KernelTable& kernels, double delta_ratio, double t);

/// Right-hand side by explicit 2x2 matrix algebra.
Matrix2 rhs(const Matrix2& rho, const Coefficients& c, double delta_ratio);

/// Same generator in Bloch components:
///   x' = -Delta y
///   y' =  Delta x - 4 D y + 4 f x
///   z' = -4 D z - 4 zeta
BlochVector bloch_rhs(const BlochVector& r, const Coefficients& c, double delta_ratio);

struct IntegratorOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int samples_per_cycle = 8000;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  /// Abort when purity exceeds 1 by more than this.
  double purity_guard = 1e-6;
};

struct TrajectorySample {
  double t = 0.0;
  Matrix2 rho;                     // symmetrised, unit trace
  double purity = 1.0;
  double hermiticity_error = 0.0;  // before symmetrisation
  double trace_error = 0.0;        // |Tr rho - 1| before renormalisation
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  SystemParams system;
  GeometryConfig geometry;
  std::string table_digest;
  double period = 0.0;
  int samples_per_cycle = 0;
  int n_cycles = 0;
  IntegratorOptions options;
};

/// Integrates from the pure initial state for n_cycles free periods with an
/// adaptive Dormand-Prince 5(4) stepper and dense output, sampling
/// samples_per_cycle points per period (cycle boundaries are sample points).
Trajectory evolve(const SystemParams& sys, const GeometryConfig& geo, const KernelTable& kernels,
                  int n_cycles, const IntegratorOptions& opts = {});

}  // namespace qfgp
