#pragma once

// Test-only oracles, deliberately independent of the library implementations:
// plain quadrature, the Bessel integral representation, and dense eigensolves.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt.
inline double bessel_j(int n, double x, int panels = 40000) {
  return simpson([&](double t) { return std::cos(n * t - x * std::sin(t)); }, 0.0, kPi,
                 panels) /
         kPi;
}

/// Dense Dirichlet truncation of the lattice operator.
inline Eigen::MatrixXd dense_h(const Eigen::VectorXd& diag) {
  const auto m = diag.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    h(i, i) = diag[i];
    if (i + 1 < m) {
      h(i, i + 1) = -1.0;
      h(i + 1, i) = -1.0;
    }
  }
  return h;
}

/// e^{-itH} phi through a full eigendecomposition.
inline Eigen::VectorXcd dense_expm(const Eigen::VectorXd& diag, const Eigen::VectorXcd& phi,
                                   double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_h(diag));
  const Eigen::MatrixXd& u = solver.eigenvectors();
  Eigen::VectorXcd coeffs = u.transpose() * phi;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    double e = solver.eigenvalues()[i];
    coeffs[i] *= std::complex<double>(std::cos(-e * t), std::sin(-e * t));
  }
  return u * coeffs;
}

/// Brute-force Diophantine margin over 0 < |k| <= K (sup norm), d = 1.
inline double margin_1d(double omega, double tau, int K) {
  double best = 1e300;
  for (int k = 1; k <= K; ++k) {
    double x = k * omega;
    double y = x - kPi * std::floor(x / kPi);
    double d = std::min(y, kPi - y);
    best = std::min(best, std::pow(double(k), tau) * d);
  }
  return best;
}

}  // namespace oracle
