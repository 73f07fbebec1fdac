#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <vector>

#include "qpdl/fourier.hpp"
#include "qpdl/torus.hpp"

namespace qpdl {

/// Complex sequence on the symmetric window [-N, N] of Z with Dirichlet boundary.
struct LatticeState {
  int half_width = 0;
  Eigen::VectorXcd values;  // index n stored at n + half_width

  LatticeState() = default;
  explicit LatticeState(int n) : half_width(n) {
    if (n < 0) throw std::invalid_argument("lattice state: negative window");
    values = Eigen::VectorXcd::Zero(2 * n + 1);
  }

  int size() const { return 2 * half_width + 1; }
  Complex& at(int n) { return values[n + half_width]; }
  Complex at(int n) const { return values[n + half_width]; }

  double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  double l2_norm() const { return values.norm(); }
  double l1_norm() const { return values.cwiseAbs().sum(); }

  static LatticeState delta(int n);                    // unit mass at the origin
  static LatticeState gaussian(int n, double width);   // exp(-(n/width)^2/2), l1-normalized
};

/// Diagonal samples V(theta + n*omega) over the window of q.
Eigen::VectorXd potential_diagonal(const ScalarFourier& v, const Eigen::VectorXd& theta,
                                   const Frequency& freq, int half_width);

/// (Hq)_n = -(q_{n+1} + q_{n-1}) + V(theta + n*omega) q_n with Dirichlet boundary.
LatticeState apply_h(const ScalarFourier& v, const Eigen::VectorXd& theta,
                     const Frequency& freq, const LatticeState& q);

/// In-place stencil application with a precomputed diagonal; y and q must not alias.
void apply_h_diag(const Eigen::VectorXd& diag, const Eigen::VectorXcd& q, Eigen::VectorXcd& y);

struct Gap {
  double lo = 0.0, hi = 0.0;
  double rotation = 0.0;  // pi * ids at the gap midpoint
};

struct SpectrumSummary {
  std::vector<double> eigenvalues;  // sorted ascending (single theta), or empty for scans
  double inf_estimate = 0.0;
  double sup_estimate = 0.0;
  std::vector<Gap> gaps;
};

/// Eigenvalues of the (2N+1)x(2N+1) Dirichlet truncation at a single phase.
SpectrumSummary truncated_spectrum(const ScalarFourier& v, const Eigen::VectorXd& theta,
                                   const Frequency& freq, int half_width);

/// Integrated density of states estimate: fraction of eigenvalues <= E averaged
/// over theta_samples phases along the orbit theta0 + m*omega.
double ids(double e, const ScalarFourier& v, const Frequency& freq, int half_width,
           int theta_samples, const Eigen::VectorXd& theta0);

/// Scan for maximal eigenvalue-free intervals of width >= resolution across all
/// sampled phases; each gap carries the constant pi*ids value inside it.
SpectrumSummary detect_gaps(const ScalarFourier& v, const Frequency& freq, int half_width,
                            double resolution = 1e-3, int theta_samples = 64);

/// Smallest |k| <= k_max whose half-resonance matches rotation within tol.
std::optional<Eigen::VectorXi> label_gap(double rotation, int k_max, const Frequency& freq,
                                         double tol);

}  // namespace qpdl
