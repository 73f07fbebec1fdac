#include "qpdl/nls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpdl {

namespace {

void nonlinear_half_step(Eigen::VectorXcd& q, double p, int sign, double half_dt) {
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    double amp = std::abs(q[i]);
    if (amp == 0.0) continue;
    double phase = -sign * std::pow(amp, p - 1.0) * half_dt;
    q[i] *= Complex(std::cos(phase), std::sin(phase));
  }
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

NlsTrajectory nls_evolve(const LatticeState& phi, double p, int sign, double t_final,
                         double dt, const ScalarFourier& v, const Eigen::VectorXd& theta,
                         const Frequency& freq, double sample_dt, bool skip_linear) {
  if (p <= 1.0) throw std::invalid_argument("nls: p must exceed 1");
  if (sign != 1 && sign != -1) throw std::invalid_argument("nls: sign must be +-1");
  double radius = 2.0 + v.sup_bound();
  double dt_cap = 0.1 / (radius + std::pow(phi.sup_norm(), p - 1.0));
  if (dt > dt_cap) {
    std::ostringstream msg;
    msg << "nls: dt " << dt << " exceeds the stability cap " << dt_cap;
    throw std::invalid_argument(msg.str());
  }
  NlsTrajectory out;
  Eigen::VectorXd diag = potential_diagonal(v, theta, freq, phi.half_width);
  LatticeState q = phi;
  double l2_ref = q.l2_norm();
  int edge = std::max(phi.half_width - 10, 0);
  long n_steps = static_cast<long>(std::ceil(t_final / dt));
  long sample_every = std::max(1L, static_cast<long>(std::llround(sample_dt / dt)));
  auto record = [&](double t) {
    out.times.push_back(t);
    out.sup_norms.push_back(q.sup_norm());
    out.l2_norms.push_back(q.l2_norm());
  };
  record(0.0);
  for (long s = 1; s <= n_steps; ++s) {
    double step = std::min(dt, t_final - (s - 1) * dt);
    nonlinear_half_step(q.values, p, sign, 0.5 * step);
    if (!skip_linear) evolve_unchecked(q.values, step, diag, radius);
    nonlinear_half_step(q.values, p, sign, 0.5 * step);
    double t = std::min(static_cast<double>(s) * dt, t_final);
    double drift = std::abs(q.l2_norm() / l2_ref - 1.0);
    if (drift > 1e-6 * std::max(t, 1.0))
      throw ContractViolation("nls: l2 drift exceeds 1e-6 per unit time");
    double fringe = 0.0;
    for (int n = edge; n <= phi.half_width; ++n)
      fringe = std::max({fringe, std::abs(q.at(n)), std::abs(q.at(-n))});
    if (fringe > 1e-12 * std::max(q.sup_norm(), 1e-300)) {
      out.truncated = true;
      break;
    }
    if (s % sample_every == 0 || s == n_steps) record(t);
  }
  out.final_state = std::move(q);
  return out;
}

double convolution_constant(double zeta, double mu, const std::vector<double>& t_samples,
                            double tol, double s_max) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("convolution: zeta in (0,1]");
  if (!(mu > 1.0)) throw std::invalid_argument("convolution: mu must exceed 1");
  double sup = 0.0;
  for (double t : t_samples) {
    auto integrand = [&](double s) {
      double a = 1.0 + (t - s) * (t - s);
      double b = 1.0 + s * s;
      return std::pow(a, -0.5 * zeta) * std::pow(b, -0.5 * mu);
    };
    double split = std::min(2.0 * std::abs(t) + 10.0, s_max);
    double value = integrate(integrand, 0.0, split, tol);
    if (split < s_max) {
      // log substitution tames the long smooth tail
      auto tail_f = [&](double u) {
        double s = std::exp(u);
        return integrand(s) * s;
      };
      value += integrate(tail_f, std::log(split), std::log(s_max), tol);
    }
    // analytic remainder beyond s_max
    double rem = std::pow(s_max - t, -zeta) * std::pow(s_max, 1.0 - mu) / (mu - 1.0);
    value += rem;
    sup = std::max(sup, std::pow(1.0 + t * t, 0.5 * zeta) * value);
  }
  return sup;
}

double measure_k1(const LatticeState& phi, double zeta, double t_max, const ScalarFourier& v,
                  const Eigen::VectorXd& theta, const Frequency& freq) {
  std::vector<double> times = {0.0};
  for (double t = 0.25; t <= t_max; t *= std::sqrt(2.0)) times.push_back(t);
  times.push_back(t_max);
  double radius = 2.0 + v.sup_bound();
  if (phi.half_width < 2.0 * radius * t_max + 50.0)
    throw std::invalid_argument("measure_k1: window below wavefront margin");
  Eigen::VectorXd diag = potential_diagonal(v, theta, freq, phi.half_width);
  LatticeState q = phi;
  double l1 = phi.l1_norm();
  double sup = 0.0, t_now = 0.0;
  for (double t : times) {
    evolve_unchecked(q.values, t - t_now, diag, radius);
    t_now = t;
    sup = std::max(sup, std::pow(1.0 + t * t, 0.5 * zeta) * q.sup_norm() / l1);
  }
  return sup;
}

BootstrapVerdict bootstrap_check(const NlsRun& run) {
  BootstrapVerdict out;
  out.truncated = run.truncated;
  if (run.delta0 <= 0.0) {
    out.passes = true;
    out.margin = 0.0;
    return out;
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    double t = run.times[i];
    sup = std::max(sup, std::pow(1.0 + t * t, 0.5 * run.zeta) * run.sup_norms[i]);
  }
  out.sup_weighted = sup;
  double cap = 4.0 * run.k1 * run.delta0;
  out.margin = sup / cap;
  out.passes = run.delta0 < run.delta_star && out.margin <= 1.0;
  return out;
}

}  // namespace qpdl
