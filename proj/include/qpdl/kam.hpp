#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "qpdl/cocycle.hpp"
#include "qpdl/fourier.hpp"
#include "qpdl/torus.hpp"

namespace qpdl {

inline constexpr double kKamSigma = 1.0 / 200.0;

/// eps_{j+1} = eps_j^{1+sigma}, N_j = 4^{j+1} sigma |ln eps_j|, floored at n_min.
struct KamSchedule {
  double sigma = kKamSigma;
  double eps0 = 0.0;
  int n_min = 20;
  double radius = 0.5;              // base analyticity radius for the norm ladder
  double nonres_beta = 0.5;         // divisor-floor exponent: band eps_j^beta / |k|^tau
  double divisor_floor = 1e-14;
  double eps_star_proxy = 0.25;     // admissible bound on the weighted norm of V

  std::vector<double> eps;          // eps_0 .. eps_J
  std::vector<double> n_raw;        // N_j before flooring, j = 0 .. J-1
  std::vector<int> n_eff;           // max(ceil(N_j), n_min)

  static KamSchedule make(double eps0, int levels, int n_min = 20);
  /// Shrinking radius ladder r_j = radius * (1/2 + 2^{-j-1}).
  double radius_at(int j) const { return radius * (0.5 + std::pow(2.0, -j - 1)); }
};

struct KamError : std::runtime_error {
  int step;
  Eigen::VectorXi k;
  KamError(const std::string& what, int step_, Eigen::VectorXi k_)
      : std::runtime_error(what), step(step_), k(std::move(k_)) {}
};

struct StepStats {
  int j = 0;
  int n_trunc = 0;
  double f_norm_before = 0.0;  // weighted norm at r_j
  double f_norm_after = 0.0;   // weighted norm at r_{j+1}
  double min_divisor = 0.0;
  double w_norm = 0.0;
  Eigen::VectorXi resonant_k;  // zero vector when the step was non-resonant
  double xi_after = 0.0;
};

/// Full state of a finite-depth reduction of the cocycle at one energy.
struct ReducedCocycle {
  double energy = 0.0;
  int steps_done = 0;
  SL2 a = SL2::Identity();          // constant part
  MatrixFourier f;                  // torus-dependent remainder
  MatrixFourier z, z_inv;           // accumulated conjugator and its inverse
  MatrixFourier c0;                 // original cocycle A0 + F0(.)
  std::vector<Eigen::VectorXi> resonances;  // per-step labels, zero when unused
  double xi = 0.0;                  // signed rotation angle of a (0 or pi if hyperbolic)
  double kappa = 0.0;               // hyperbolic expansion rate, 0 on the elliptic set
  bool elliptic = true;
  double rho = 0.0;                 // xi + accumulated half-resonance shifts, folded
  double offset = 0.0;              // sum of exact <k_l, omega>/2 shifts
  double residual_norm = 0.0;
  std::vector<StepStats> step_log;

  int layer() const;                // 1 + first resonant step, or 0
  Eigen::VectorXi resonance_sum() const;
};

struct NonresResult {
  bool ok = true;
  Eigen::VectorXi violating_k;  // zero vector when ok
  double distance = 0.0;
  double threshold = 0.0;
};

/// Smallest-|k| violation of dist_pi(rho, <k,omega>/2) >= eps_j^beta / |k|^tau
/// over 0 < |k| <= n_j.
NonresResult nonresonance_check(double rho_approx, double eps_j, int n_j,
                                const Frequency& freq, double beta = 0.5);

ReducedCocycle initial_state(double e, const ScalarFourier& v, const Frequency& freq);

/// One homological solve: kills the non-constant part of f up to order n_eff[j],
/// replaces (a, f, z) with the exactly conjugated state. Requires an elliptic,
/// non-resonant constant part.
void kam_step(ReducedCocycle& state, const KamSchedule& sched, int j, const Frequency& freq);

/// Conjugation by Q R(<k,theta>/2) Q^{-1}: shifts the rotation angle by
/// -<k,omega>/2 and appends k to the resonance history.
void resonant_rotation(ReducedCocycle& state, const Eigen::VectorXi& k, const Frequency& freq,
                       const KamSchedule& sched, int j);

/// Alternate nonresonance checks, resonant rotations and homological steps.
ReducedCocycle reduce(double e, const ScalarFourier& v, const Frequency& freq,
                      const KamSchedule& sched, int levels);

/// Weighted coefficient norm of z(.+w)^{-1} (A0+F0) z(.) - (a + f).
double conjugacy_residual_norm(const ReducedCocycle& state, const Frequency& freq);

/// Pointwise sup of the same defect over a uniform theta grid.
double conjugacy_residual_grid(const ReducedCocycle& state, const Frequency& freq,
                               int grid_points = 64);

struct PartitionInterval {
  double lo = 0.0, hi = 0.0;
  int layer = 0;
};

struct SpectralPartition {
  std::vector<PartitionInterval> intervals;
  int component_count = 0;
  double component_bound_proxy = 0.0;  // |ln eps0|^{2 J^2 d}
};

SpectralPartition partition_spectrum(const ScalarFourier& v, const Frequency& freq,
                                     const KamSchedule& sched, int levels,
                                     const std::vector<double>& e_grid);

struct XiDiagnostics {
  double xi_prime = 0.0;
  double xi_second = 0.0;
  double tr_prime = 0.0;
  double identity_gap = 0.0;  // |xi' + tr'/(2 sin xi)|
  bool lower_window_ok = false;  // 1/3 < xi'
  bool excluded = false;         // |sin xi| <= (3/2) eps_J^{1/20}
};

/// Finite differences on a uniform same-component E-stencil of >= 5 states.
XiDiagnostics xi_derivative_diagnostics(const std::vector<ReducedCocycle>& stencil,
                                        double h, const KamSchedule& sched);

/// Fold x into the rotation-number range (about [0, pi]) by 2*pi shifts.
double fold_rho(double x);

}  // namespace qpdl
