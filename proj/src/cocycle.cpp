#include "qpdl/cocycle.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qpdl {

SL2 transfer_matrix(double e, const ScalarFourier& v, const Eigen::VectorXd& theta) {
  SL2 m;
  m << -e + v.eval(theta), -1.0, 1.0, 0.0;
  return m;
}

Eigen::Matrix2d rot2(double angle) {
  Eigen::Matrix2d r;
  double c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

void renormalize_det(SL2& a) {
  double d = a.determinant();
  if (!(d > 0.0)) throw std::runtime_error("renormalize: non-positive determinant");
  a /= std::sqrt(d);
}

SL2 cocycle_product(double e, const ScalarFourier& v, const Eigen::VectorXd& theta,
                    const Frequency& freq, long n) {
  if (n < 1) throw std::invalid_argument("cocycle product: n must be >= 1");
  SL2 prod = SL2::Identity();
  Eigen::VectorXd th = theta;
  for (long i = 0; i < n; ++i) {
    prod = transfer_matrix(e, v, th) * prod;
    th += freq.omega();
    if ((i + 1) % 32 == 0) renormalize_det(prod);
  }
  renormalize_det(prod);
  return prod;
}

double lyapunov_exponent(double e, const ScalarFourier& v, const Eigen::VectorXd& theta0,
                         const Frequency& freq, long n_max, int phases) {
  if (n_max < 100) throw std::invalid_argument("lyapunov: n_max must be >= 100");
  double acc = 0.0;
  for (int p = 0; p < phases; ++p) {
    Eigen::VectorXd th = theta0 + (static_cast<double>(p) * kTwoPi / phases) *
                                      Eigen::VectorXd::Ones(freq.dim());
    Eigen::VectorXd pot = orbit_samples(v, th, freq.omega(), n_max);
    double wx = 1.0, wy = 0.0;
    double log_sum = 0.0;
    for (long i = 0; i < n_max; ++i) {
      double nx = (pot[i] - e) * wx - wy;
      double ny = wx;
      double norm = std::sqrt(nx * nx + ny * ny);
      log_sum += std::log(norm);
      wx = nx / norm;
      wy = ny / norm;
    }
    acc += log_sum / static_cast<double>(n_max);
  }
  double lambda = acc / phases;
  return std::max(lambda, 0.0);
}

RotationEstimate rotation_number(double e, const ScalarFourier& v,
                                 const Eigen::VectorXd& theta, const Frequency& freq,
                                 long n_max) {
  if (n_max < 1000) throw std::invalid_argument("rotation number: n_max must be >= 1e3");
  Eigen::VectorXd pot = orbit_samples(v, theta, freq.omega(), n_max);
  double wx = 1.0, wy = 0.0;
  double sum = 0.0;
  // tail-difference estimates (S_m - S_{m/2}) / (m - m/2): the boundary term of
  // the Birkhoff sum cancels exponentially fast on hyperbolic (gap) energies
  const int checkpoints = 10;
  std::vector<long> marks;
  std::vector<double> sums;
  for (int j = 0; j < checkpoints; ++j) {
    long m = static_cast<long>(std::llround(n_max * (0.9 + 0.01 * (j + 1))));
    if (j + 1 == checkpoints) m = n_max;
    marks.push_back(m / 2);
    marks.push_back(m);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  sums.resize(marks.size());
  std::size_t mark_i = 0;
  for (long i = 1; i <= n_max; ++i) {
    // transfer step [[V - E, -1], [1, 0]]
    double nx = (pot[i - 1] - e) * wx - wy;
    double ny = wx;
    double cross = wx * ny - wy * nx;
    double dot = wx * nx + wy * ny;
    double inc = std::atan2(cross, dot);
    // the companion form confines true increments to (-pi/2, 3pi/2); raw values
    // below -pi/2 are aliased near-pi steps (hyperbolic flips)
    if (inc < -0.5 * kPi) inc += kTwoPi;
    sum += inc;
    double inv_norm = 1.0 / std::sqrt(nx * nx + ny * ny);
    wx = nx * inv_norm;
    wy = ny * inv_norm;
    while (mark_i < marks.size() && i == marks[mark_i]) sums[mark_i++] = sum;
  }
  auto sum_at = [&](long m) {
    auto it = std::lower_bound(marks.begin(), marks.end(), m);
    return sums[static_cast<std::size_t>(it - marks.begin())];
  };
  RotationEstimate out;
  out.iterations = n_max;
  double lo = 0.0, hi = 0.0, value = 0.0;
  for (int j = 0; j < checkpoints; ++j) {
    long m = static_cast<long>(std::llround(n_max * (0.9 + 0.01 * (j + 1))));
    if (j + 1 == checkpoints) m = n_max;
    double est = (sum_at(m) - sum_at(m / 2)) / static_cast<double>(m - m / 2);
    if (j == 0) lo = hi = est;
    lo = std::min(lo, est);
    hi = std::max(hi, est);
    value = est;  // deepest tail estimate wins
  }
  out.oscillation = hi - lo;
  out.value = std::clamp(value, 0.0, kPi);
  return out;
}

RhoDerivative rho_derivative(double e, const ScalarFourier& v, const Eigen::VectorXd& theta,
                             const Frequency& freq, double h_step, long n_max) {
  if (h_step <= 0.0) throw std::invalid_argument("rho derivative: h_step must be positive");
  RotationEstimate up = rotation_number(e + h_step, v, theta, freq, n_max);
  RotationEstimate dn = rotation_number(e - h_step, v, theta, freq, n_max);
  RhoDerivative out;
  out.value = std::max((up.value - dn.value) / (2.0 * h_step), 0.0);
  double oscillation = 0.5 * (up.oscillation + dn.oscillation);
  out.noisy = oscillation > h_step * std::max(out.value, 1e-9);
  return out;
}

std::optional<RotationForm> rotation_form(const SL2& a) {
  double tr = a.trace();
  if (std::abs(tr) >= 2.0) return std::nullopt;
  double xi0 = std::acos(std::clamp(0.5 * tr, -1.0, 1.0));  // in (0, pi)
  Complex lambda(std::cos(xi0), std::sin(xi0));
  Eigen::Vector2cd vec;
  if (std::abs(a(0, 1)) >= std::abs(a(1, 0)))
    vec << Complex(a(0, 1), 0.0), lambda - a(0, 0);
  else
    vec << lambda - a(1, 1), Complex(a(1, 0), 0.0);
  Eigen::Vector2d u = vec.real();
  Eigen::Vector2d w = vec.imag();
  double det = u.x() * w.y() - u.y() * w.x();
  if (std::abs(det) < 1e-300) return std::nullopt;  // defective within rounding
  RotationForm out;
  if (det < 0.0) {
    out.q.col(0) = u;
    out.q.col(1) = -w;
    out.xi = xi0;
    det = -det;
  } else {
    out.q.col(0) = u;
    out.q.col(1) = w;
    out.xi = -xi0;
  }
  out.q /= std::sqrt(det);
  return out;
}

EigenAngle eigen_angle(const SL2& a) {
  EigenAngle out;
  double tr = a.trace();
  if (std::abs(tr) < 2.0) {
    auto rf = rotation_form(a);
    if (rf) {
      out.elliptic = true;
      out.xi = rf->xi;
      out.kappa = 0.0;
      return out;
    }
  }
  out.elliptic = false;
  out.kappa = std::acosh(std::max(std::abs(tr) / 2.0, 1.0));
  out.xi = tr >= 0.0 ? 0.0 : kPi;
  return out;
}

}  // namespace qpdl
