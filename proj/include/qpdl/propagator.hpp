#pragma once

#include <vector>

#include "qpdl/lattice.hpp"
#include "qpdl/spectral.hpp"

namespace qpdl {

/// Numerical-contract failure (unitarity drift, step-size violations, ...).
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// J_0(x) .. J_{m_max}(x) by backward recurrence.
std::vector<double> bessel_j_sequence(double x, int m_max);

/// e^{-itH} q0 by Chebyshev expansion on the spectral enclosure
/// [-2 - ||V||, 2 + ||V||]. Refuses windows smaller than the wavefront margin
/// 2 (2 + ||V||) |t| + 50; enforces l2 conservation to 1e-10 relative.
LatticeState evolve(const LatticeState& q0, double t, const ScalarFourier& v,
                    const Eigen::VectorXd& theta, const Frequency& freq);

/// Same expansion without the window/unitarity contract, for callers that
/// manage their own wavefront accounting. diag holds V(theta + n w) samples.
void evolve_unchecked(Eigen::VectorXcd& q, double t, const Eigen::VectorXd& diag,
                      double radius);

struct DecayProfile {
  std::vector<double> times;
  std::vector<double> sup_norms;
  std::vector<double> l2_norms;
  double slope = 0.0;
  double slope_err = 0.0;  // one-sigma band from the fit residuals
  int fit_points = 0;
  bool boundary_reached = false;
};

/// Norms of e^{-itH} phi over the given times (evolved sequentially) and the
/// least-squares slope of log sup-norm against log <t> over t >= 10.
DecayProfile decay_profile(const LatticeState& phi, std::vector<double> times,
                           const ScalarFourier& v, const Eigen::VectorXd& theta,
                           const Frequency& freq);

/// q_n(t) ~ (1/pi) sum_cells e^{-iEt} (g1 K_n + g2 J_n) rho' dE with G = S(phi).
/// Refuses grids with in-band cell width above pi/(8|t|).
LatticeState reconstruct_evolution(const LatticeState& phi, double t, const EigTable& table,
                                   const SpectralGrid& grid);

}  // namespace qpdl
