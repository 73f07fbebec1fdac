#pragma once

#include <Eigen/Core>
#include <optional>

#include "qpdl/fourier.hpp"
#include "qpdl/torus.hpp"

namespace qpdl {

using SL2 = Eigen::Matrix2d;

/// [[-E + V(theta), -1], [1, 0]]; determinant 1 exactly.
SL2 transfer_matrix(double e, const ScalarFourier& v, const Eigen::VectorXd& theta);

/// Ordered product M(theta+(n-1)w) ... M(theta), renormalized to det 1 every 32 factors.
SL2 cocycle_product(double e, const ScalarFourier& v, const Eigen::VectorXd& theta,
                    const Frequency& freq, long n);

/// (1/n) log ||product||, averaged over phases along the orbit; non-negative.
double lyapunov_exponent(double e, const ScalarFourier& v, const Eigen::VectorXd& theta0,
                         const Frequency& freq, long n_max, int phases = 8);

struct RotationEstimate {
  double value = 0.0;        // in [0, pi]
  long iterations = 0;
  double oscillation = 0.0;  // spread of last-decade partial averages
};

/// Fibered rotation number via continuous angle tracking of the projective action.
RotationEstimate rotation_number(double e, const ScalarFourier& v, const Eigen::VectorXd& theta,
                                 const Frequency& freq, long n_max);

struct RhoDerivative {
  double value = 0.0;  // clamped to >= 0
  bool noisy = false;  // oscillation of the underlying estimates exceeds h*value
};

/// Central finite difference of the rotation number in E.
RhoDerivative rho_derivative(double e, const ScalarFourier& v, const Eigen::VectorXd& theta,
                             const Frequency& freq, double h_step, long n_max);

/// Rotation normal form A = Q R(xi) Q^{-1} with det Q = 1 and xi the signed
/// rotation angle in (-pi, 0) u (0, pi). Empty for |tr A| >= 2.
struct RotationForm {
  Eigen::Matrix2d q;
  double xi = 0.0;
};
std::optional<RotationForm> rotation_form(const SL2& a);

/// Eigenvalues of A written as e^{+-i alpha}, alpha = xi + i kappa.
/// Elliptic: kappa = 0, xi signed. Hyperbolic: xi in {0, pi}, kappa = arcosh(|tr|/2).
struct EigenAngle {
  double xi = 0.0;
  double kappa = 0.0;
  bool elliptic = false;
};
EigenAngle eigen_angle(const SL2& a);

/// Rescale toward det = 1 (divides by sqrt(det); det must be positive).
void renormalize_det(SL2& a);

/// Rotation by angle: [[cos, -sin], [sin, cos]].
Eigen::Matrix2d rot2(double angle);

}  // namespace qpdl
