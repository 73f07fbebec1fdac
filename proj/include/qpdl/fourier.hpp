#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "qpdl/torus.hpp"

namespace qpdl {

using Complex = std::complex<double>;
using ModeIndex = std::vector<int>;

ModeIndex to_mode(const Eigen::VectorXi& k);
Eigen::VectorXi from_mode(const ModeIndex& m);
int mode_l1(const ModeIndex& m);
int mode_linf(const ModeIndex& m);
ModeIndex negated(const ModeIndex& m);

/// Truncated Fourier series of a real-valued function on the d-torus.
///
/// Coefficients satisfy c(-k) = conj(c(k)); absent modes are zero. The weighted
/// coefficient sum sum_k |c_k| e^{r |k|_1} dominates the supremum of the analytic
/// extension on the strip |Im theta| < r.
class ScalarFourier {
 public:
  explicit ScalarFourier(int dim = 1) : dim_(dim) {}

  int dim() const { return dim_; }
  bool empty() const { return coeffs_.empty(); }
  const std::map<ModeIndex, Complex>& coeffs() const { return coeffs_; }

  Complex coeff(const Eigen::VectorXi& k) const;
  void set_coeff(const Eigen::VectorXi& k, Complex c);
  /// Set c at k and conj(c) at -k in one call.
  void set_pair(const Eigen::VectorXi& k, Complex c);

  double eval(const Eigen::VectorXd& theta) const;
  Complex eval_complex(const Eigen::VectorXd& theta) const;

  ScalarFourier shifted(const Eigen::VectorXd& delta) const;
  double norm_weighted(double r) const;   // sum_k |c_k| e^{r |k|_1}
  double sup_bound() const { return norm_weighted(0.0); }
  bool reality_ok(double tol = 1e-12) const;
  int max_mode() const;                   // max |k|_inf over stored modes

  ScalarFourier& operator*=(double s);

  static ScalarFourier zero(int dim = 1) { return ScalarFourier(dim); }
  /// 2*eps*cos(theta_1): coefficient eps at k = +-e_1.
  static ScalarFourier cosine(double eps, int dim = 1);
  /// Random real-analytic trig polynomial with |c_k| ~ eps * e^{-r |k|_1}.
  static ScalarFourier random_analytic(double eps, double r, int k_max, std::uint64_t seed,
                                       int dim = 1);

 private:
  int dim_;
  std::map<ModeIndex, Complex> coeffs_;
};

/// 2x2-matrix-valued Fourier series, optionally on the doubled torus.
///
/// A mode m with denominator q in {1,2} carries the character e^{i <m,theta>/q}.
/// Matrix-series products promote both factors to the common denominator.
class MatrixFourier {
 public:
  using Mat = Eigen::Matrix2cd;

  explicit MatrixFourier(int dim = 1, int denom = 1) : dim_(dim), denom_(denom) {}

  int dim() const { return dim_; }
  int denom() const { return denom_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t mode_count() const { return coeffs_.size(); }
  const std::map<ModeIndex, Mat>& coeffs() const { return coeffs_; }

  Mat coeff(const ModeIndex& m) const;
  void add_coeff(const ModeIndex& m, const Mat& c);
  void set_coeff(const ModeIndex& m, const Mat& c);

  Eigen::Matrix2cd eval(const Eigen::VectorXd& theta) const;
  Eigen::Matrix2d eval_real(const Eigen::VectorXd& theta) const;

  MatrixFourier shifted(const Eigen::VectorXd& delta) const;
  MatrixFourier promoted() const;          // denom 1 -> denom 2
  MatrixFourier adjoint_modes() const;     // coefficient-wise conj at -m (real series: identity)
  double norm_weighted(double r) const;    // sum_m ||C_m||_F e^{r |m|_1 / denom}
  double constant_drop_norm() const;
  bool reality_ok(double tol = 1e-10) const;
  void enforce_reality();
  /// Drop modes with Frobenius norm below tol (absolute).
  void compress(double tol);
  int max_mode() const;

  MatrixFourier& operator+=(const MatrixFourier& rhs);
  MatrixFourier& operator-=(const MatrixFourier& rhs);
  MatrixFourier& operator*=(double s);
  friend MatrixFourier operator+(MatrixFourier a, const MatrixFourier& b) { return a += b; }
  friend MatrixFourier operator-(MatrixFourier a, const MatrixFourier& b) { return a -= b; }
  friend MatrixFourier operator*(const MatrixFourier& a, const MatrixFourier& b);

  static MatrixFourier constant(const Eigen::Matrix2d& a, int dim, int denom = 1);
  static MatrixFourier constant_c(const Mat& a, int dim, int denom = 1);
  /// Rotation R(<k,theta>/2) as a two-mode series on the doubled torus.
  static MatrixFourier half_angle_rotation(const Eigen::VectorXi& k, int dim);

 private:
  int dim_;
  int denom_;
  std::map<ModeIndex, Mat> coeffs_;
};

/// exp(W) as a series; converges for any W, fast for small weighted norm.
MatrixFourier exp_series(const MatrixFourier& w, double tol = 1e-19, int max_order = 28);

/// (I + W)^{-1} via the Neumann series; requires the weighted norm of W at r=0
/// to be < 1. Terms below tol are discarded.
MatrixFourier neumann_inverse(const MatrixFourier& w, double tol = 1e-17, int max_order = 64);

/// V(theta + n*omega) for n = 0..count-1 by incremental phase rotation per mode.
Eigen::VectorXd orbit_samples(const ScalarFourier& v, const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& omega, long count);

}  // namespace qpdl
