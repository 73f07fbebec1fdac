#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "qpdl/kam.hpp"
#include "qpdl/lattice.hpp"

namespace qpdl {

struct GridPoint {
  double e = 0.0;
  double rho = 0.0;
  double drho = 0.0;   // d rho / d E, finite-differenced along the grid
  double mass = 0.0;   // integral of rho' dE over the cell around this point
  int layer = 0;
  double xi = 0.0;
  double kappa = 0.0;
  bool elliptic = false;
};

/// Sampled energies with rotation-number data and the reductions behind them.
struct SpectralGrid {
  std::vector<GridPoint> pts;
  std::vector<ReducedCocycle> states;  // parallel to pts
  double e_lo = 0.0, e_hi = 0.0;       // spectrum hull used for the scan
  double rho_floor = 1e-6;             // cells with drho below this carry no mass
  double eps0 = 0.0, eps_last = 0.0;
  int levels = 0;

  double max_cell_de() const;          // largest in-band cell width
};

/// Grid with targets uniform in the rotation number (energies found by bisection).
SpectralGrid build_grid_rho_uniform(const ScalarFourier& v, const Frequency& freq,
                                    const KamSchedule& sched, int levels, int n_points);

/// Grid uniform in energy over [e_lo, e_hi].
SpectralGrid build_grid_e_uniform(const ScalarFourier& v, const Frequency& freq,
                                  const KamSchedule& sched, int levels, int n_points,
                                  double e_lo, double e_hi);

/// Estimate [inf, sup] of the spectrum from moderate truncations.
std::pair<double, double> spectrum_hull(const ScalarFourier& v, const Frequency& freq,
                                        int half_width = 300, int theta_samples = 8);

/// Bloch wave psi_n = e^{i n rho} f_n on [-window, window], normalized to |f_0| = 1.
/// With resonant_scaling the amplitude is additionally multiplied by sin^5(xi)
/// on resonant layers. Throws for hyperbolic (gap) states.
std::vector<Complex> bloch_wave(const ReducedCocycle& state, const Eigen::VectorXd& theta,
                                const Frequency& freq, int window,
                                bool resonant_scaling = false);

struct Eigenfunctions {
  double e = 0.0, rho = 0.0;
  bool valid = false;
  Eigen::VectorXd k_fn, j_fn;                     // K_n, J_n on [-window, window]
  Eigen::VectorXd beta_lo, beta_mid, beta_hi;     // three-term weights per n
  double misfit = 0.0;
};

Eigenfunctions eigenfunctions(const ReducedCocycle& state, const Eigen::VectorXd& theta,
                              const Frequency& freq, int window);

struct EigTable {
  int window = 0;
  std::vector<Eigenfunctions> fns;  // parallel to grid points; invalid on gaps
};

/// Gap points are left invalid and carry no mass. A positive sin_xi_floor also
/// drops points whose rotation normal form is near-degenerate; the default
/// keeps them, since their mass is genuine band mass.
EigTable build_eigenfunction_table(const SpectralGrid& grid, const Eigen::VectorXd& theta,
                                   const Frequency& freq, int window,
                                   double sin_xi_floor = 0.0);

/// Per-energy pairing (sum_n q_n K_n, sum_n q_n J_n).
struct SpectralVector {
  std::vector<Eigen::Vector2cd> g;  // parallel to grid points
};

SpectralVector spectral_transform(const LatticeState& q, const EigTable& table,
                                  const SpectralGrid& grid);

/// ||G||^2 in L^2 of the diagonal density rho'/pi.
double spectral_l2_sq(const SpectralVector& g, const SpectralGrid& grid);

LatticeState inverse_transform(const SpectralVector& g, const EigTable& table,
                               const SpectralGrid& grid, int window);

std::pair<double, double> frame_bounds(const std::vector<LatticeState>& samples,
                                       const EigTable& table, const SpectralGrid& grid);

}  // namespace qpdl
