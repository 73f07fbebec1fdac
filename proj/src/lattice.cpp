#include "qpdl/lattice.hpp"

#include "qpdl/cocycle.hpp"
#include "qpdl/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpdl {

LatticeState LatticeState::delta(int n) {
  LatticeState q(n);
  q.at(0) = Complex(1.0, 0.0);
  return q;
}

LatticeState LatticeState::gaussian(int n, double width) {
  LatticeState q(n);
  for (int i = -n; i <= n; ++i) q.at(i) = std::exp(-0.5 * (i / width) * (i / width));
  double l1 = q.l1_norm();
  q.values /= l1;
  return q;
}

Eigen::VectorXd potential_diagonal(const ScalarFourier& v, const Eigen::VectorXd& theta,
                                   const Frequency& freq, int half_width) {
  Eigen::VectorXd diag(2 * half_width + 1);
  Eigen::VectorXd th = theta;
  if (v.empty()) {
    diag.setZero();
    return diag;
  }
  for (int n = -half_width; n <= half_width; ++n) {
    th = theta + static_cast<double>(n) * freq.omega();
    diag[n + half_width] = v.eval(th);
  }
  return diag;
}

void apply_h_diag(const Eigen::VectorXd& diag, const Eigen::VectorXcd& q, Eigen::VectorXcd& y) {
  const auto m = q.size();
  y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Complex s = diag[i] * q[i];
    if (i > 0) s -= q[i - 1];
    if (i + 1 < m) s -= q[i + 1];
    y[i] = s;
  }
}

LatticeState apply_h(const ScalarFourier& v, const Eigen::VectorXd& theta,
                     const Frequency& freq, const LatticeState& q) {
  LatticeState out(q.half_width);
  Eigen::VectorXd diag = potential_diagonal(v, theta, freq, q.half_width);
  apply_h_diag(diag, q.values, out.values);
  return out;
}

static Eigen::VectorXd tridiag_eigenvalues(const Eigen::VectorXd& diag) {
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(diag.size() - 1, -1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("truncated spectrum: eigensolver failed to converge");
  return solver.eigenvalues();
}

SpectrumSummary truncated_spectrum(const ScalarFourier& v, const Eigen::VectorXd& theta,
                                   const Frequency& freq, int half_width) {
  if (half_width < 2) throw std::invalid_argument("truncated spectrum: window too small");
  Eigen::VectorXd diag = potential_diagonal(v, theta, freq, half_width);
  Eigen::VectorXd ev = tridiag_eigenvalues(diag);
  SpectrumSummary out;
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  out.inf_estimate = out.eigenvalues.front();
  out.sup_estimate = out.eigenvalues.back();
  return out;
}

static std::vector<double> collect_eigenvalues(const ScalarFourier& v, const Frequency& freq,
                                               int half_width, int theta_samples,
                                               const Eigen::VectorXd& theta0) {
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(theta_samples) * (2 * half_width + 1));
  for (int m = 0; m < theta_samples; ++m) {
    Eigen::VectorXd theta = theta0 + static_cast<double>(m) * freq.omega();
    Eigen::VectorXd diag = potential_diagonal(v, theta, freq, half_width);
    Eigen::VectorXd ev = tridiag_eigenvalues(diag);
    all.insert(all.end(), ev.data(), ev.data() + ev.size());
  }
  std::sort(all.begin(), all.end());
  return all;
}

double ids(double e, const ScalarFourier& v, const Frequency& freq, int half_width,
           int theta_samples, const Eigen::VectorXd& theta0) {
  if (half_width < 2) throw std::invalid_argument("ids: window too small");
  std::vector<double> all = collect_eigenvalues(v, freq, half_width, theta_samples, theta0);
  auto it = std::upper_bound(all.begin(), all.end(), e);
  return static_cast<double>(it - all.begin()) / static_cast<double>(all.size());
}

SpectrumSummary detect_gaps(const ScalarFourier& v, const Frequency& freq, int half_width,
                            double resolution, int theta_samples) {
  if (resolution <= 0.0) throw std::invalid_argument("detect_gaps: resolution must be positive");
  // Uniform phases: orbit samples only shift the truncation window, so their
  // union is barely denser than a single spectrum.
  std::vector<double> levels;
  for (int m = 0; m < theta_samples; ++m) {
    Eigen::VectorXd theta =
        Eigen::VectorXd::Constant(freq.dim(), kTwoPi * static_cast<double>(m) / theta_samples);
    Eigen::VectorXd ev = tridiag_eigenvalues(potential_diagonal(v, theta, freq, half_width));
    levels.insert(levels.end(), ev.data(), ev.data() + ev.size());
  }
  std::sort(levels.begin(), levels.end());

  SpectrumSummary out;
  out.inf_estimate = levels.front();
  out.sup_estimate = levels.back();

  // Candidate holes. Dirichlet windows host boundary-localized eigenvalues
  // inside true gaps, so a gap generally appears as several fragments; the
  // rotation-number plateau distinguishes fragments of one gap (equal values)
  // from in-band sparsity (strictly increasing values).
  double mean_spacing = (out.sup_estimate - out.inf_estimate) / levels.size();
  double hole_floor = std::max(resolution / 4.0, 6.0 * mean_spacing);
  struct Hole {
    double lo, hi, rho_lo, rho_hi;
  };
  std::vector<Hole> holes;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    if (levels[i + 1] - levels[i] >= hole_floor) holes.push_back({levels[i], levels[i + 1], 0, 0});
  if (holes.size() > 20000) {  // keep the validation budget bounded
    std::sort(holes.begin(), holes.end(),
              [](const Hole& a, const Hole& b) { return a.hi - a.lo > b.hi - b.lo; });
    holes.resize(20000);
    std::sort(holes.begin(), holes.end(),
              [](const Hole& a, const Hole& b) { return a.lo < b.lo; });
  }

  const long n_lift = 150000;
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(freq.dim());
  std::vector<char> is_gap(holes.size(), 0);
  parallel_for(holes.size(), [&](std::size_t i) {
    Hole& h = holes[i];
    double w = h.hi - h.lo;
    double probe_lo = h.lo + 0.25 * w, probe_hi = h.hi - 0.25 * w;
    RotationEstimate r1 = rotation_number(probe_lo, v, theta0, freq, n_lift);
    RotationEstimate r2 = rotation_number(probe_hi, v, theta0, freq, n_lift);
    h.rho_lo = r1.value;
    h.rho_hi = r2.value;
    double flat_tol = std::max(4e-5, 2.0 * (r1.oscillation + r2.oscillation));
    is_gap[i] = std::abs(r2.value - r1.value) <= flat_tol ? 1 : 0;
  });

  // merge validated holes sharing a plateau value, then push the interval out
  // to the true edges by bisection against the plateau
  auto rho_at = [&](double e) { return rotation_number(e, v, theta0, freq, 2 * n_lift).value; };
  auto expand_edge = [&](double inside, double plateau, double direction) {
    const double edge_tol = 1e-4, range_cap = 0.2;
    double step = std::max(resolution, 1e-3);
    double lo = inside, hi = inside + direction * step;
    int tries = 0;
    while (std::abs(rho_at(hi) - plateau) <= edge_tol && ++tries < 16 &&
           std::abs(hi - inside) < range_cap)
      hi += direction * step;
    for (int it = 0; it < 40; ++it) {
      double mid = 0.5 * (lo + hi);
      if (std::abs(rho_at(mid) - plateau) <= edge_tol)
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  };
  auto cumulative_ids = [&](double e) {
    auto it = std::upper_bound(levels.begin(), levels.end(), e);
    return static_cast<double>(it - levels.begin()) / static_cast<double>(levels.size());
  };
  std::size_t i = 0;
  while (i < holes.size()) {
    if (!is_gap[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < holes.size() && is_gap[j + 1] &&
           std::abs(holes[j + 1].rho_lo - holes[i].rho_hi) <= 5e-5)
      ++j;
    double plateau = 0.5 * (holes[i].rho_lo + holes[j].rho_hi);
    double seed_lo = holes[i].lo + 0.25 * (holes[i].hi - holes[i].lo);
    double seed_hi = holes[j].hi - 0.25 * (holes[j].hi - holes[j].lo);
    Gap g;
    g.lo = expand_edge(seed_lo, plateau, -1.0);
    g.hi = expand_edge(seed_hi, plateau, +1.0);
    if (g.hi - g.lo >= resolution &&
        (out.gaps.empty() || g.lo > out.gaps.back().hi - 1e-12)) {
      g.rotation = kPi * cumulative_ids(0.5 * (g.lo + g.hi));
      out.gaps.push_back(g);
    }
    i = j + 1;
  }
  return out;
}

std::optional<Eigen::VectorXi> label_gap(double rotation, int k_max, const Frequency& freq,
                                         double tol) {
  std::optional<Eigen::VectorXi> best;
  int best_norm = k_max + 1;
  for_each_mode(freq.dim(), k_max, [&](const Eigen::VectorXi& k) {
    int norm = k.cwiseAbs().maxCoeff();
    if (norm >= best_norm) return;
    if (circle_pi_dist(rotation, half_resonance(k, freq)) <= tol) {
      best = k;
      best_norm = norm;
    }
  });
  return best;
}

}  // namespace qpdl
