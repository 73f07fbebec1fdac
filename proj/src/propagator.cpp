#include "qpdl/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpdl {

std::vector<double> bessel_j_sequence(double x, int m_max) {
  std::vector<double> j(m_max + 1, 0.0);
  if (std::abs(x) < 1e-280) {
    j[0] = 1.0;
    return j;
  }
  int top = std::max(m_max, static_cast<int>(std::ceil(std::abs(x))));
  int start = top + 20 + static_cast<int>(12.0 * std::cbrt(static_cast<double>(top) + 1.0));
  double jp = 0.0, jc = 1e-280;
  double norm = 0.0;  // J_0 + 2 sum_{m even} J_m = 1, accumulated over the descent
  std::vector<double> raw(m_max + 1, 0.0);
  for (int m = start; m >= 1; --m) {
    double jm = (2.0 * m / x) * jc - jp;
    jp = jc;
    jc = jm;
    if (std::abs(jc) > 1e250) {  // rescale to avoid overflow during the descent
      double s = 1e-250;
      jc *= s;
      jp *= s;
      norm *= s;
      for (auto& v : raw) v *= s;
    }
    int idx = m - 1;
    if (idx <= m_max) raw[idx] = jc;
    if (idx % 2 == 0) norm += idx == 0 ? jc : 2.0 * jc;
  }
  for (int m = 0; m <= m_max; ++m) j[m] = raw[m] / norm;
  return j;
}

namespace {

void apply_scaled(const Eigen::VectorXd& diag, double inv_radius, const Eigen::VectorXcd& q,
                  Eigen::VectorXcd& y) {
  const Eigen::Index m = q.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    Complex s = diag[i] * q[i];
    if (i > 0) s -= q[i - 1];
    if (i + 1 < m) s -= q[i + 1];
    y[i] = s * inv_radius;
  }
}

int chebyshev_order(double a) {
  double guess = a + 12.0 * std::cbrt(a + 1.0) + 25.0;
  return static_cast<int>(std::ceil(guess));
}

}  // namespace

void evolve_unchecked(Eigen::VectorXcd& q, double t, const Eigen::VectorXd& diag,
                      double radius) {
  double a = radius * std::abs(t);
  if (a == 0.0) return;
  int m_max = chebyshev_order(a);
  std::vector<double> bess = bessel_j_sequence(a, m_max);
  while (m_max > 1 && std::abs(bess[m_max]) < 1e-17 && std::abs(bess[m_max - 1]) < 1e-17)
    --m_max;
  double sign_t = t >= 0.0 ? 1.0 : -1.0;
  double inv_radius = 1.0 / radius;

  Eigen::VectorXcd t_prev = q;
  Eigen::VectorXcd t_cur(q.size());
  apply_scaled(diag, inv_radius, t_prev, t_cur);
  Eigen::VectorXcd acc = bess[0] * t_prev;
  // (-i)^m phases: m=1 -> -i, m=2 -> -1, m=3 -> +i, m=0 -> +1 (times sign for t<0)
  Eigen::VectorXcd scratch(q.size());
  for (int m = 1; m <= m_max; ++m) {
    if (m >= 2) {
      apply_scaled(diag, inv_radius, t_cur, scratch);
      scratch = 2.0 * scratch - t_prev;
      t_prev.swap(t_cur);
      t_cur.swap(scratch);
    }
    Complex phase;
    switch (m & 3) {
      case 0: phase = Complex(1, 0); break;
      case 1: phase = Complex(0, -sign_t); break;
      case 2: phase = Complex(-1, 0); break;
      default: phase = Complex(0, sign_t); break;
    }
    acc += (2.0 * bess[m] * phase) * t_cur;
  }
  q = std::move(acc);
}

LatticeState evolve(const LatticeState& q0, double t, const ScalarFourier& v,
                    const Eigen::VectorXd& theta, const Frequency& freq) {
  double radius = 2.0 + v.sup_bound();
  double need = 2.0 * radius * std::abs(t) + 50.0;
  if (q0.half_width < need) {
    std::ostringstream msg;
    msg << "evolve: window " << q0.half_width << " below wavefront margin " << need
        << " for t = " << t;
    throw std::invalid_argument(msg.str());
  }
  LatticeState out = q0;
  Eigen::VectorXd diag = potential_diagonal(v, theta, freq, q0.half_width);
  double before = q0.l2_norm();
  evolve_unchecked(out.values, t, diag, radius);
  double after = out.l2_norm();
  if (before > 0.0 && std::abs(after / before - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "evolve: l2 norm drifted by " << after / before - 1.0 << " at t = " << t;
    throw ContractViolation(msg.str());
  }
  return out;
}

DecayProfile decay_profile(const LatticeState& phi, std::vector<double> times,
                           const ScalarFourier& v, const Eigen::VectorXd& theta,
                           const Frequency& freq) {
  std::sort(times.begin(), times.end());
  if (times.empty() || times.front() < 0.0)
    throw std::invalid_argument("decay profile: need non-negative times");
  double radius = 2.0 + v.sup_bound();
  if (phi.half_width < 2.0 * radius * times.back() + 50.0)
    throw std::invalid_argument("decay profile: window below wavefront margin at t_max");

  DecayProfile out;
  Eigen::VectorXd diag = potential_diagonal(v, theta, freq, phi.half_width);
  LatticeState q = phi;
  double t_now = 0.0;
  int edge = std::max(phi.half_width - 10, 0);
  for (double t : times) {
    evolve_unchecked(q.values, t - t_now, diag, radius);
    t_now = t;
    double sup = q.sup_norm();
    double fringe = 0.0;
    for (int n = edge; n <= phi.half_width; ++n)
      fringe = std::max({fringe, std::abs(q.at(n)), std::abs(q.at(-n))});
    if (fringe > 1e-12 * std::max(sup, 1e-300)) {
      out.boundary_reached = true;
      break;
    }
    out.times.push_back(t);
    out.sup_norms.push_back(sup);
    out.l2_norms.push_back(q.l2_norm());
  }

  // least squares of log sup against log <t> over the transient-free range
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n_fit = 0;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    if (out.times[i] < 10.0) continue;
    double x = std::log(std::sqrt(1.0 + out.times[i] * out.times[i]));
    double y = std::log(out.sup_norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n_fit;
  }
  out.fit_points = n_fit;
  if (n_fit >= 2) {
    double denom = n_fit * sxx - sx * sx;
    out.slope = (n_fit * sxy - sx * sy) / denom;
    double intercept = (sy - out.slope * sx) / n_fit;
    double ss = 0.0;
    for (std::size_t i = 0; i < out.times.size(); ++i) {
      if (out.times[i] < 10.0) continue;
      double x = std::log(std::sqrt(1.0 + out.times[i] * out.times[i]));
      double r = std::log(out.sup_norms[i]) - (intercept + out.slope * x);
      ss += r * r;
    }
    if (n_fit > 2) out.slope_err = std::sqrt(ss / (n_fit - 2) / (sxx - sx * sx / n_fit));
  }
  return out;
}

LatticeState reconstruct_evolution(const LatticeState& phi, double t, const EigTable& table,
                                   const SpectralGrid& grid) {
  if (t != 0.0 && grid.max_cell_de() > kPi / (8.0 * std::abs(t)))
    throw std::invalid_argument("reconstruct: grid too coarse for the requested time");
  SpectralVector g = spectral_transform(phi, table, grid);
  int window = table.window;
  LatticeState q(window);
  for (std::size_t i = 0; i < grid.pts.size(); ++i) {
    if (!table.fns[i].valid || grid.pts[i].drho <= grid.rho_floor) continue;
    double mass = grid.pts[i].mass / kPi;
    double e = grid.pts[i].e;
    Complex phase(std::cos(-e * t), std::sin(-e * t));
    Complex c1 = phase * g.g[i][0] * mass;
    Complex c2 = phase * g.g[i][1] * mass;
    const auto& fn = table.fns[i];
    for (int n = -window; n <= window; ++n)
      q.at(n) += c1 * fn.k_fn[n + window] + c2 * fn.j_fn[n + window];
  }
  return q;
}

}  // namespace qpdl
