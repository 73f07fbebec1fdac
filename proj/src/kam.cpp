#include "qpdl/kam.hpp"

#include <Eigen/LU>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace qpdl {

double fold_rho(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y > 1.5 * kPi) y -= kTwoPi;
  return y;
}

KamSchedule KamSchedule::make(double eps0, int levels, int n_min) {
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw std::invalid_argument("schedule: eps0 must be in (0,1)");
  if (levels < 0) throw std::invalid_argument("schedule: negative level count");
  KamSchedule s;
  s.eps0 = eps0;
  s.n_min = n_min;
  s.eps.resize(levels + 1);
  s.eps[0] = eps0;
  for (int j = 1; j <= levels; ++j) s.eps[j] = std::pow(s.eps[j - 1], 1.0 + s.sigma);
  s.n_raw.resize(levels);
  s.n_eff.resize(levels);
  for (int j = 0; j < levels; ++j) {
    s.n_raw[j] = std::pow(4.0, j + 1) * s.sigma * std::abs(std::log(s.eps[j]));
    s.n_eff[j] = std::max(static_cast<int>(std::ceil(s.n_raw[j])), n_min);
  }
  return s;
}

int ReducedCocycle::layer() const {
  for (std::size_t l = 0; l < resonances.size(); ++l)
    if (resonances[l].size() && resonances[l].cwiseAbs().maxCoeff() > 0)
      return static_cast<int>(l) + 1;
  return 0;
}

Eigen::VectorXi ReducedCocycle::resonance_sum() const {
  Eigen::VectorXi sum;
  for (const auto& k : resonances) {
    if (!k.size()) continue;
    if (!sum.size())
      sum = k;
    else
      sum += k;
  }
  return sum;
}

NonresResult nonresonance_check(double rho_approx, double eps_j, int n_j,
                                const Frequency& freq, double beta) {
  if (n_j < 1) throw std::invalid_argument("nonresonance check: n_j must be >= 1");
  NonresResult out;
  out.violating_k = Eigen::VectorXi::Zero(freq.dim());
  double band = std::pow(eps_j, beta);
  int best_norm = std::numeric_limits<int>::max();
  for_each_mode(freq.dim(), n_j, [&](const Eigen::VectorXi& k) {
    int knorm = k.cwiseAbs().maxCoeff();
    if (knorm >= best_norm) return;
    double threshold = band / std::pow(static_cast<double>(knorm), freq.tau());
    double dist = circle_pi_dist(rho_approx, half_resonance(k, freq));
    if (dist < threshold) {
      out.ok = false;
      out.violating_k = k;
      out.distance = dist;
      out.threshold = threshold;
      best_norm = knorm;
    }
  });
  return out;
}

ReducedCocycle initial_state(double e, const ScalarFourier& v, const Frequency& freq) {
  int d = freq.dim();
  ReducedCocycle st;
  st.energy = e;
  st.a << -e, -1.0, 1.0, 0.0;
  st.f = MatrixFourier(d, 1);
  for (const auto& [m, c] : v.coeffs()) {
    Eigen::Matrix2cd fm = Eigen::Matrix2cd::Zero();
    fm(0, 0) = c;
    st.f.set_coeff(m, fm);
  }
  st.z = MatrixFourier::constant(Eigen::Matrix2d::Identity(), d, 1);
  st.z_inv = st.z;
  st.c0 = MatrixFourier::constant(st.a, d, 1) + st.f;
  EigenAngle ea = eigen_angle(st.a);
  st.elliptic = ea.elliptic;
  st.xi = ea.xi;
  st.kappa = ea.kappa;
  st.rho = fold_rho(st.xi);
  return st;
}

namespace {

struct ComplexBasis {
  Eigen::Matrix2cd p;      // A = p diag(e^{i xi}, e^{-i xi}) p^{-1}
  Eigen::Matrix2cd p_inv;
  double xi;
};

ComplexBasis complex_basis(const SL2& a) {
  auto rf = rotation_form(a);
  if (!rf) throw std::runtime_error("complex basis: constant part is not elliptic");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd c;
  c << Complex(inv_sqrt2, 0), Complex(inv_sqrt2, 0), Complex(0, -inv_sqrt2),
      Complex(0, inv_sqrt2);
  Eigen::Matrix2cd c_inv;
  c_inv << Complex(inv_sqrt2, 0), Complex(0, inv_sqrt2), Complex(inv_sqrt2, 0),
      Complex(0, -inv_sqrt2);
  ComplexBasis out;
  out.p = rf->q.cast<Complex>() * c;
  Eigen::Matrix2d q_inv;
  q_inv << rf->q(1, 1), -rf->q(0, 1), -rf->q(1, 0), rf->q(0, 0);  // det q = 1
  out.p_inv = c_inv * q_inv.cast<Complex>();
  out.xi = rf->xi;
  return out;
}

}  // namespace

void kam_step(ReducedCocycle& state, const KamSchedule& sched, int j, const Frequency& freq) {
  if (j < 0 || j >= static_cast<int>(sched.n_eff.size()))
    throw std::invalid_argument("kam step: level index out of range");
  ComplexBasis basis = complex_basis(state.a);
  const int n_trunc = sched.n_eff[j];
  const int denom = state.f.denom();
  const Eigen::VectorXd& omega = freq.omega();

  StepStats stats;
  stats.j = j;
  stats.n_trunc = n_trunc;
  stats.f_norm_before = state.f.norm_weighted(sched.radius_at(j));
  stats.min_divisor = std::numeric_limits<double>::infinity();
  stats.resonant_k = Eigen::VectorXi::Zero(freq.dim());

  const Complex eigs[2] = {Complex(std::cos(basis.xi), std::sin(basis.xi)),
                           Complex(std::cos(basis.xi), -std::sin(basis.xi))};

  MatrixFourier w(state.f.dim(), denom);
  for (const auto& [m, fm] : state.f.coeffs()) {
    if (mode_linf(m) == 0 || mode_linf(m) > n_trunc * denom) continue;
    if (m < negated(m)) continue;  // mirror is filled by reality
    double beta = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) beta += m[i] * omega[static_cast<int>(i)];
    beta /= denom;
    Complex phase(std::cos(beta), std::sin(beta));
    Eigen::Matrix2cd f_tilde = basis.p_inv * fm * basis.p;
    Eigen::Matrix2cd w_tilde;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        Complex divisor = eigs[r] - phase * eigs[c];
        double mag = std::abs(divisor);
        if (mag < sched.divisor_floor) {
          std::ostringstream msg;
          msg << "kam step " << j << ": divisor " << mag << " below floor at mode ["
              << from_mode(m).transpose() << "]";
          throw KamError(msg.str(), j, from_mode(m));
        }
        stats.min_divisor = std::min(stats.min_divisor, mag);
        w_tilde(r, c) = -f_tilde(r, c) / divisor;
      }
    }
    // unimodularity slaves the scalar part of f to quadratic order, so the
    // trace of the solution can be dropped; exp of a traceless series then
    // keeps the conjugator exactly in SL(2,R)
    Complex half_trace = 0.5 * (w_tilde(0, 0) + w_tilde(1, 1));
    w_tilde(0, 0) -= half_trace;
    w_tilde(1, 1) -= half_trace;
    Eigen::Matrix2cd wm = basis.p * w_tilde * basis.p_inv;
    w.set_coeff(m, wm);
    if (negated(m) != m) w.set_coeff(negated(m), wm.conjugate());
  }
  stats.w_norm = w.norm_weighted(0.0);
  if (stats.w_norm > 0.5)
    throw KamError("kam step: homological solution too large for a perturbative step", j,
                   Eigen::VectorXi::Zero(freq.dim()));

  // constant part of f joins the constant matrix; renormalize the determinant
  Eigen::Matrix2cd f0 = state.f.coeff(ModeIndex(static_cast<std::size_t>(state.f.dim()), 0));
  SL2 a_raw = state.a + f0.real();
  double det = a_raw.determinant();
  if (!(det > 0.0))
    throw KamError("kam step: constant part lost positivity", j, Eigen::VectorXi::Zero(freq.dim()));
  SL2 a_next = a_raw / std::sqrt(det);

  // exact conjugated cocycle exp(-W(.+w)) (a + f) exp(W)
  MatrixFourier w_neg = w;
  w_neg *= -1.0;
  MatrixFourier right = exp_series(w);
  MatrixFourier left = exp_series(w_neg.shifted(omega));
  MatrixFourier middle = MatrixFourier::constant(state.a, state.f.dim(), denom) + state.f;
  MatrixFourier g = left * middle * right;
  MatrixFourier f_next = g - MatrixFourier::constant(a_next, state.f.dim(), denom);
  f_next.enforce_reality();
  f_next.compress(1e-18 * std::max(1.0, stats.f_norm_before));

  state.z = state.z * right;
  state.z_inv = exp_series(w_neg) * state.z_inv;
  state.z.compress(1e-18);
  state.z_inv.compress(1e-18);
  state.a = a_next;
  state.f = f_next;
  ++state.steps_done;

  EigenAngle ea = eigen_angle(state.a);
  state.elliptic = ea.elliptic;
  state.xi = ea.xi;
  state.kappa = ea.kappa;
  state.rho = fold_rho(state.xi + state.offset);

  stats.f_norm_after = state.f.norm_weighted(sched.radius_at(j + 1));
  stats.xi_after = state.xi;
  state.step_log.push_back(stats);
}

void resonant_rotation(ReducedCocycle& state, const Eigen::VectorXi& k, const Frequency& freq,
                       const KamSchedule& sched, int j) {
  if (!k.size() || k.cwiseAbs().maxCoeff() == 0) return;  // identity
  auto rf = rotation_form(state.a);
  if (!rf) throw KamError("resonant rotation: constant part is not elliptic", j, k);
  const int d = freq.dim();
  Eigen::Matrix2d q = rf->q;
  Eigen::Matrix2d q_inv;
  q_inv << q(1, 1), -q(0, 1), -q(1, 0), q(0, 0);

  MatrixFourier rot_p = MatrixFourier::half_angle_rotation(k, d);
  MatrixFourier rot_m = MatrixFourier::half_angle_rotation(Eigen::VectorXi(-k), d);
  MatrixFourier qs = MatrixFourier::constant(q, d, 2);
  MatrixFourier qs_inv = MatrixFourier::constant(q_inv, d, 2);
  MatrixFourier conj = qs * rot_p * qs_inv;        // M(theta)
  MatrixFourier conj_inv = qs * rot_m * qs_inv;    // M(theta)^{-1}

  double shift = half_resonance_raw(k, freq);
  double chi = std::remainder(rf->xi - shift, kTwoPi);  // into (-pi, pi]
  SL2 a_next = q * rot2(chi) * q_inv;
  renormalize_det(a_next);

  MatrixFourier f_next = conj_inv.shifted(freq.omega()) * state.f * conj;
  f_next.enforce_reality();
  f_next.compress(1e-18 * std::max(1.0, f_next.norm_weighted(0.0)));

  state.z = state.z * conj;
  state.z_inv = conj_inv * state.z_inv;
  state.a = a_next;
  state.f = f_next;
  state.offset += shift;

  EigenAngle ea = eigen_angle(state.a);
  state.elliptic = ea.elliptic;
  state.xi = ea.xi;
  state.kappa = ea.kappa;
  state.rho = fold_rho(state.xi + state.offset);
  (void)sched;
}

ReducedCocycle reduce(double e, const ScalarFourier& v, const Frequency& freq,
                      const KamSchedule& sched, int levels) {
  if (levels + 1 > static_cast<int>(sched.eps.size()))
    throw std::invalid_argument("reduce: schedule shorter than requested depth");
  double v_norm = v.norm_weighted(sched.radius);
  if (v_norm >= sched.eps_star_proxy)
    throw std::invalid_argument("reduce: potential norm exceeds the admissible proxy");
  ReducedCocycle state = initial_state(e, v, freq);
  state.resonances.assign(levels, Eigen::VectorXi::Zero(freq.dim()));
  for (int j = 0; j < levels; ++j) {
    if (!state.elliptic) break;  // hyperbolic constant part: gap energy, stop here
    if (state.f.norm_weighted(0.0) <= 1e-14) break;  // already reduced
    NonresResult nr = nonresonance_check(mod_pi(state.xi), sched.eps[j], sched.n_eff[j], freq,
                                         sched.nonres_beta);
    if (!nr.ok) {
      resonant_rotation(state, nr.violating_k, freq, sched, j);
      state.resonances[j] = nr.violating_k;
      if (state.elliptic) {
        NonresResult recheck = nonresonance_check(mod_pi(state.xi), sched.eps[j],
                                                  sched.n_eff[j], freq, sched.nonres_beta);
        bool same_k = (recheck.violating_k - nr.violating_k).cwiseAbs().sum() == 0;
        if (!recheck.ok && !same_k) {
          std::ostringstream msg;
          msg << "reduce: still resonant after rotation at step " << j << " (k = ["
              << recheck.violating_k.transpose() << "])";
          throw KamError(msg.str(), j, recheck.violating_k);
        }
      }
    }
    if (!state.elliptic) break;
    kam_step(state, sched, j, freq);
    state.step_log.back().resonant_k = state.resonances[j];
  }
  state.residual_norm = conjugacy_residual_norm(state, freq);
  return state;
}

double conjugacy_residual_norm(const ReducedCocycle& state, const Frequency& freq) {
  MatrixFourier lhs = state.z_inv.shifted(freq.omega()) * state.c0 * state.z;
  MatrixFourier rhs =
      MatrixFourier::constant(state.a, state.f.dim(), state.f.denom()) + state.f;
  MatrixFourier res = lhs - rhs;
  res.compress(1e-300);
  return res.norm_weighted(0.0);
}

double conjugacy_residual_grid(const ReducedCocycle& state, const Frequency& freq,
                               int grid_points) {
  double sup = 0.0;
  int d = state.f.dim();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < grid_points; ++i) {
    theta.setConstant(kTwoPi * 2.0 * i / grid_points);  // doubled-torus period
    Eigen::Matrix2d z = state.z.eval_real(theta);
    Eigen::Matrix2d z_shift = state.z.eval_real(theta + freq.omega());
    Eigen::Matrix2d c0 = state.c0.eval_real(theta);
    Eigen::Matrix2d z_shift_inv;
    double det = z_shift.determinant();
    z_shift_inv << z_shift(1, 1), -z_shift(0, 1), -z_shift(1, 0), z_shift(0, 0);
    z_shift_inv /= det;
    Eigen::Matrix2d lhs = z_shift_inv * c0 * z;
    Eigen::Matrix2d rhs = state.a + state.f.eval_real(theta);
    sup = std::max(sup, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return sup;
}

SpectralPartition partition_spectrum(const ScalarFourier& v, const Frequency& freq,
                                     const KamSchedule& sched, int levels,
                                     const std::vector<double>& e_grid) {
  SpectralPartition out;
  if (e_grid.size() < 2) throw std::invalid_argument("partition: grid too small");
  std::vector<int> layers(e_grid.size());
  for (std::size_t i = 0; i < e_grid.size(); ++i) {
    try {
      layers[i] = reduce(e_grid[i], v, freq, sched, levels).layer();
    } catch (const KamError&) {
      layers[i] = -1;
    }
  }
  std::size_t start = 0;
  for (std::size_t i = 1; i <= e_grid.size(); ++i) {
    if (i == e_grid.size() || layers[i] != layers[start]) {
      PartitionInterval seg;
      seg.lo = start == 0 ? e_grid.front() : 0.5 * (e_grid[start - 1] + e_grid[start]);
      seg.hi = i == e_grid.size() ? e_grid.back() : 0.5 * (e_grid[i - 1] + e_grid[i]);
      seg.layer = layers[start];
      out.intervals.push_back(seg);
      start = i;
    }
  }
  out.component_count = static_cast<int>(out.intervals.size());
  double lg = std::abs(std::log(sched.eps0));
  out.component_bound_proxy =
      std::pow(lg, 2.0 * levels * levels * freq.dim());
  return out;
}

XiDiagnostics xi_derivative_diagnostics(const std::vector<ReducedCocycle>& stencil, double h,
                                        const KamSchedule& sched) {
  if (stencil.size() < 5) throw std::invalid_argument("xi diagnostics: need >= 5 stencil points");
  std::size_t c = stencil.size() / 2;
  for (std::size_t i = 1; i < stencil.size(); ++i) {
    if (stencil[i].resonances.size() != stencil[0].resonances.size())
      throw std::invalid_argument("xi diagnostics: stencil depth mismatch");
    for (std::size_t l = 0; l < stencil[i].resonances.size(); ++l)
      if ((stencil[i].resonances[l] - stencil[0].resonances[l]).cwiseAbs().sum() != 0)
        throw std::invalid_argument("xi diagnostics: stencil crosses a component boundary");
    if (!stencil[i].elliptic)
      throw std::invalid_argument("xi diagnostics: hyperbolic point in stencil");
  }
  XiDiagnostics out;
  out.xi_prime = (stencil[c + 1].xi - stencil[c - 1].xi) / (2.0 * h);
  out.xi_second = (stencil[c + 1].xi - 2.0 * stencil[c].xi + stencil[c - 1].xi) / (h * h);
  out.tr_prime = (stencil[c + 1].a.trace() - stencil[c - 1].a.trace()) / (2.0 * h);
  double sin_xi = std::sin(stencil[c].xi);
  out.identity_gap = std::abs(out.xi_prime + out.tr_prime / (2.0 * sin_xi));
  out.lower_window_ok = out.xi_prime > 1.0 / 3.0;
  double eps_last = sched.eps.back();
  out.excluded = std::abs(sin_xi) <= 1.5 * std::pow(eps_last, 1.0 / 20.0);
  return out;
}

}  // namespace qpdl
