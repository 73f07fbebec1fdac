#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qpdl {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Reduce x modulo pi into [0, pi).
double mod_pi(double x);

/// Distance from x to the nearest multiple of pi (ties resolved downward).
double dist_pi_grid(double x);

/// Distance between a and b on the circle R/(pi Z).
double circle_pi_dist(double a, double b);

struct DiophantineMargin {
  double min_margin = 0.0;       // min over 0<|k|<=K of |k|^tau * dist(<k,omega>, pi Z)
  Eigen::VectorXi argmin_k;
};

DiophantineMargin diophantine_margin(const Eigen::VectorXd& omega, double tau, int K);

/// Frequency vector on the d-torus (period 2*pi per coordinate).
///
/// Construction verifies the margin min_{0<|k|<=k_check} |k|^tau dist(<k,omega>, pi Z)
/// against gamma and throws if the prefix check fails. Only a finite prefix of the
/// resonance lattice is ever checked; the margin-vs-K curve is available as a
/// diagnostic through diophantine_margin().
class Frequency {
 public:
  Frequency(Eigen::VectorXd omega, double gamma, double tau, int k_check = 200);

  int dim() const { return static_cast<int>(omega_.size()); }
  const Eigen::VectorXd& omega() const { return omega_; }
  double gamma() const { return gamma_; }
  double tau() const { return tau_; }
  int k_check() const { return k_check_; }
  double checked_margin() const { return checked_margin_; }

  /// d=1 golden-mean frequency 2*pi*(sqrt(5)-1)/2.
  static Frequency golden(double gamma = 0.1, double tau = 2.0, int k_check = 200);

 private:
  Eigen::VectorXd omega_;
  double gamma_;
  double tau_;
  int k_check_;
  double checked_margin_;
};

/// <k,omega>/2 reduced into [0, pi).
double half_resonance(const Eigen::VectorXi& k, const Frequency& freq);

/// Unreduced half-resonance value <k,omega>/2.
double half_resonance_raw(const Eigen::VectorXi& k, const Frequency& freq);

/// Enumerate all k in Z^d with 0 < |k|_inf <= K and call fn(k).
void for_each_mode(int dim, int K, const std::function<void(const Eigen::VectorXi&)>& fn);

}  // namespace qpdl
