#include "qpdl/torus.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace qpdl {

double mod_pi(double x) {
  double y = x - kPi * std::floor(x / kPi);
  if (y >= kPi) y -= kPi;  // guard against rounding at the seam
  if (y < 0.0) y += kPi;
  return y;
}

double dist_pi_grid(double x) {
  double y = mod_pi(x);
  return std::min(y, kPi - y);
}

double circle_pi_dist(double a, double b) { return dist_pi_grid(a - b); }

void for_each_mode(int dim, int K, const std::function<void(const Eigen::VectorXi&)>& fn) {
  Eigen::VectorXi k = Eigen::VectorXi::Constant(dim, -K);
  for (;;) {
    if (k.cwiseAbs().maxCoeff() > 0) fn(k);
    int i = 0;
    while (i < dim) {
      if (k[i] < K) {
        ++k[i];
        break;
      }
      k[i] = -K;
      ++i;
    }
    if (i == dim) break;
  }
}

DiophantineMargin diophantine_margin(const Eigen::VectorXd& omega, double tau, int K) {
  DiophantineMargin out;
  out.min_margin = std::numeric_limits<double>::infinity();
  out.argmin_k = Eigen::VectorXi::Zero(omega.size());
  int best_norm = std::numeric_limits<int>::max();
  for_each_mode(static_cast<int>(omega.size()), K, [&](const Eigen::VectorXi& k) {
    double kw = omega.dot(k.cast<double>());
    int knorm = k.cwiseAbs().maxCoeff();
    double margin = std::pow(static_cast<double>(knorm), tau) * dist_pi_grid(kw);
    if (margin < out.min_margin || (margin == out.min_margin && knorm < best_norm)) {
      out.min_margin = margin;
      out.argmin_k = k;
      best_norm = knorm;
    }
  });
  return out;
}

Frequency::Frequency(Eigen::VectorXd omega, double gamma, double tau, int k_check)
    : omega_(std::move(omega)), gamma_(gamma), tau_(tau), k_check_(k_check) {
  if (omega_.size() < 1) throw std::invalid_argument("frequency: empty omega");
  if (gamma_ <= 0.0) throw std::invalid_argument("frequency: gamma must be positive");
  if (tau_ <= static_cast<double>(omega_.size()) - 1.0)
    throw std::invalid_argument("frequency: tau must exceed d-1");
  if (k_check_ < 1) throw std::invalid_argument("frequency: k_check must be >= 1");
  DiophantineMargin m = diophantine_margin(omega_, tau_, k_check_);
  checked_margin_ = m.min_margin;
  if (!(checked_margin_ > gamma_)) {
    std::ostringstream msg;
    msg << "frequency: margin " << checked_margin_ << " at k = ["
        << m.argmin_k.transpose() << "] does not exceed gamma = " << gamma_;
    throw std::invalid_argument(msg.str());
  }
}

Frequency Frequency::golden(double gamma, double tau, int k_check) {
  Eigen::VectorXd omega(1);
  omega[0] = kTwoPi * (std::sqrt(5.0) - 1.0) / 2.0;
  return Frequency(std::move(omega), gamma, tau, k_check);
}

double half_resonance_raw(const Eigen::VectorXi& k, const Frequency& freq) {
  return 0.5 * freq.omega().dot(k.cast<double>());
}

double half_resonance(const Eigen::VectorXi& k, const Frequency& freq) {
  return mod_pi(half_resonance_raw(k, freq));
}

}  // namespace qpdl
