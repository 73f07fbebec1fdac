#include "qpdl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpdl {

double SpectralGrid::max_cell_de() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i].drho <= rho_floor && pts[i + 1].drho <= rho_floor) continue;
    m = std::max(m, pts[i + 1].e - pts[i].e);
  }
  return m;
}

std::pair<double, double> spectrum_hull(const ScalarFourier& v, const Frequency& freq,
                                        int half_width, int theta_samples) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(freq.dim());
  for (int m = 0; m < theta_samples; ++m) {
    Eigen::VectorXd theta = theta0 + static_cast<double>(m) * freq.omega();
    SpectrumSummary s = truncated_spectrum(v, theta, freq, half_width);
    lo = std::min(lo, s.inf_estimate);
    hi = std::max(hi, s.sup_estimate);
  }
  return {lo, hi};
}

static void finalize_grid(SpectralGrid& grid) {
  auto& pts = grid.pts;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = i == 0 ? 0 : i - 1;
    std::size_t b = i + 1 == n ? i : i + 1;
    double de = pts[b].e - pts[a].e;
    pts[i].drho = de > 0 ? std::max((pts[b].rho - pts[a].rho) / de, 0.0) : 0.0;
    // cell mass in the rotation-number variable; end cells absorb the caps
    // down to rho = 0 and up to rho = pi (both builders span the spectrum)
    double rho_lo = i == 0 ? 0.0 : 0.5 * (pts[i - 1].rho + pts[i].rho);
    double rho_hi = i + 1 == n ? kPi : 0.5 * (pts[i].rho + pts[i + 1].rho);
    pts[i].mass = std::max(rho_hi - rho_lo, 0.0);
  }
}

// A still-resonant abort at depth J is retried at shallower depths; the
// shallower rotation number is within the contraction scale of the deep one.
static ReducedCocycle reduce_with_fallback(double e, const ScalarFourier& v,
                                           const Frequency& freq, const KamSchedule& sched,
                                           int levels) {
  for (int depth = levels; depth > 0; --depth) {
    try {
      return reduce(e, v, freq, sched, depth);
    } catch (const KamError&) {
    }
  }
  return reduce(e, v, freq, sched, 0);
}

static GridPoint point_from_state(const ReducedCocycle& st) {
  GridPoint p;
  p.e = st.energy;
  p.rho = st.rho;
  p.layer = st.layer();
  p.xi = st.xi;
  p.kappa = st.kappa;
  p.elliptic = st.elliptic;
  return p;
}

SpectralGrid build_grid_e_uniform(const ScalarFourier& v, const Frequency& freq,
                                  const KamSchedule& sched, int levels, int n_points,
                                  double e_lo, double e_hi) {
  if (n_points < 8) throw std::invalid_argument("grid: too few points");
  SpectralGrid grid;
  grid.e_lo = e_lo;
  grid.e_hi = e_hi;
  grid.eps0 = sched.eps0;
  grid.eps_last = sched.eps.back();
  grid.levels = levels;
  grid.pts.reserve(n_points);
  grid.states.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    double e = e_lo + (e_hi - e_lo) * i / (n_points - 1);
    ReducedCocycle st = reduce_with_fallback(e, v, freq, sched, levels);
    grid.pts.push_back(point_from_state(st));
    grid.states.push_back(std::move(st));
  }
  finalize_grid(grid);
  return grid;
}

SpectralGrid build_grid_rho_uniform(const ScalarFourier& v, const Frequency& freq,
                                    const KamSchedule& sched, int levels, int n_points) {
  if (n_points < 8) throw std::invalid_argument("grid: too few points");
  auto [hull_lo, hull_hi] = spectrum_hull(v, freq);
  double e_lo = hull_lo - 0.05, e_hi = hull_hi + 0.05;
  SpectralGrid grid;
  grid.e_lo = hull_lo;
  grid.e_hi = hull_hi;
  grid.eps0 = sched.eps0;
  grid.eps_last = sched.eps.back();
  grid.levels = levels;
  grid.pts.reserve(n_points);
  grid.states.reserve(n_points);

  double e_prev = e_lo;
  for (int i = 0; i < n_points; ++i) {
    double target = (i + 0.5) * kPi / n_points;
    double lo = e_prev, hi = e_hi;
    ReducedCocycle st_lo = reduce_with_fallback(lo, v, freq, sched, levels);
    if (st_lo.rho > target) {  // monotonicity slack; restart bracket from the left hull
      lo = e_lo;
      st_lo = reduce_with_fallback(lo, v, freq, sched, levels);
    }
    ReducedCocycle st = st_lo;
    double mid = lo;
    for (int it = 0; it < 64 && hi - lo > 1e-13 * (2.0 + std::abs(hi)); ++it) {
      mid = 0.5 * (lo + hi);
      st = reduce_with_fallback(mid, v, freq, sched, levels);
      if (st.rho < target)
        lo = mid;
      else
        hi = mid;
    }
    grid.pts.push_back(point_from_state(st));
    grid.states.push_back(std::move(st));
    e_prev = lo;
  }
  finalize_grid(grid);
  return grid;
}

std::vector<Complex> bloch_wave(const ReducedCocycle& state, const Eigen::VectorXd& theta,
                                const Frequency& freq, int window, bool resonant_scaling) {
  if (!state.elliptic)
    throw std::invalid_argument("bloch wave: hyperbolic constant part (gap energy)");
  auto rf = rotation_form(state.a);
  if (!rf) throw std::invalid_argument("bloch wave: rotation form unavailable");
  Eigen::VectorXi kap = state.resonance_sum();
  bool winding = kap.size() && kap.cwiseAbs().maxCoeff() > 0;
  const double rho = state.rho;
  const Complex iu(0.0, 1.0);

  std::vector<Complex> psi(2 * window + 1);
  for (int n = -window; n <= window; ++n) {
    Eigen::VectorXd th = theta + static_cast<double>(n) * freq.omega();
    Eigen::Matrix2d m = state.z.eval_real(th) * rf->q;
    if (winding) {
      double angle = -0.5 * th.dot(kap.cast<double>());
      m = m * rot2(angle);
    }
    // f_n = first component of m (1, -i)/sqrt(2)
    Complex f = (m(0, 0) - iu * m(0, 1)) / std::sqrt(2.0);
    psi[n + window] = std::exp(iu * (rho * n)) * f;
  }
  Complex f0 = psi[window];
  double scale = std::abs(f0);
  if (scale < 1e-14) throw std::runtime_error("bloch wave: vanishing amplitude at n = 0");
  double extra = 1.0;
  if (resonant_scaling && state.layer() >= 1) extra = std::pow(std::sin(state.xi), 5);
  for (auto& c : psi) c *= extra / scale;
  return psi;
}

Eigenfunctions eigenfunctions(const ReducedCocycle& state, const Eigen::VectorXd& theta,
                              const Frequency& freq, int window) {
  Eigenfunctions out;
  out.e = state.energy;
  out.rho = state.rho;
  std::vector<Complex> psi = bloch_wave(state, theta, freq, window);
  const int sz = 2 * window + 1;
  out.k_fn.resize(sz);
  out.j_fn.resize(sz);
  out.beta_lo.resize(sz);
  out.beta_mid.resize(sz);
  out.beta_hi.resize(sz);
  Complex psi0 = psi[window];
  double rho = out.rho;
  double cr = std::cos(rho), sr = std::sin(rho);
  double misfit = 0.0;
  for (int n = -window; n <= window; ++n) {
    Complex g = psi[n + window] * std::conj(psi0);
    out.k_fn[n + window] = g.imag();
    out.j_fn[n + window] = g.real();
    Complex h = g * std::exp(Complex(0.0, -rho * n));
    double d, s;
    if (std::abs(sr) > 1e-8) {
      d = h.imag() / sr;
      s = 2.0 * cr * (h.real() - 1.0) / (1.0 + 2.0 * cr * cr);
    } else {
      d = 0.0;
      s = 2.0 * cr * (h.real() - 1.0) / (1.0 + 2.0 * cr * cr);
      misfit = std::max(misfit, std::abs(h.imag()));
    }
    out.beta_lo[n + window] = 0.5 * (s - d);
    out.beta_mid[n + window] = h.real() - s * cr;
    out.beta_hi[n + window] = 0.5 * (s + d);
  }
  out.misfit = misfit;
  out.valid = true;
  return out;
}

EigTable build_eigenfunction_table(const SpectralGrid& grid, const Eigen::VectorXd& theta,
                                   const Frequency& freq, int window, double sin_xi_floor) {
  EigTable table;
  table.window = window;
  table.fns.resize(grid.pts.size());
  for (std::size_t i = 0; i < grid.pts.size(); ++i) {
    if (!grid.pts[i].elliptic || grid.pts[i].drho <= grid.rho_floor) continue;  // gap cell
    if (sin_xi_floor > 0.0 && std::abs(std::sin(grid.pts[i].xi)) < sin_xi_floor)
      continue;  // near-degenerate normal form
    table.fns[i] = eigenfunctions(grid.states[i], theta, freq, window);
  }
  return table;
}

SpectralVector spectral_transform(const LatticeState& q, const EigTable& table,
                                  const SpectralGrid& grid) {
  SpectralVector out;
  out.g.assign(grid.pts.size(), Eigen::Vector2cd::Zero());
  int w = table.window;
  int qw = q.half_width;
  int reach = std::min(w, qw);
  for (std::size_t i = 0; i < grid.pts.size(); ++i) {
    if (!table.fns[i].valid) continue;
    Complex g1(0, 0), g2(0, 0);
    const auto& fn = table.fns[i];
    for (int n = -reach; n <= reach; ++n) {
      Complex qn = q.at(n);
      if (qn == Complex(0.0, 0.0)) continue;
      g1 += qn * fn.k_fn[n + w];
      g2 += qn * fn.j_fn[n + w];
    }
    out.g[i] << g1, g2;
  }
  return out;
}

double spectral_l2_sq(const SpectralVector& g, const SpectralGrid& grid) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.pts.size(); ++i) {
    if (grid.pts[i].drho <= grid.rho_floor) continue;
    acc += grid.pts[i].mass * (std::norm(g.g[i][0]) + std::norm(g.g[i][1]));
  }
  return acc / kPi;
}

LatticeState inverse_transform(const SpectralVector& g, const EigTable& table,
                               const SpectralGrid& grid, int window) {
  LatticeState q(window);
  int w = table.window;
  int reach = std::min(w, window);
  for (std::size_t i = 0; i < grid.pts.size(); ++i) {
    if (!table.fns[i].valid || grid.pts[i].drho <= grid.rho_floor) continue;
    double mass = grid.pts[i].mass / kPi;
    const auto& fn = table.fns[i];
    Complex g1 = g.g[i][0], g2 = g.g[i][1];
    for (int n = -reach; n <= reach; ++n)
      q.at(n) += mass * (g1 * fn.k_fn[n + w] + g2 * fn.j_fn[n + w]);
  }
  return q;
}

std::pair<double, double> frame_bounds(const std::vector<LatticeState>& samples,
                                       const EigTable& table, const SpectralGrid& grid) {
  if (samples.empty()) throw std::invalid_argument("frame bounds: no samples");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& q : samples) {
    double qn = q.l2_norm();
    if (qn == 0.0) continue;
    SpectralVector g = spectral_transform(q, table, grid);
    double ratio = spectral_l2_sq(g, grid) / (qn * qn);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {lo, hi};
}

}  // namespace qpdl
