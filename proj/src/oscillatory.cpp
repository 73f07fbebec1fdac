#include "qpdl/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpdl {

bool verify_profile(const PhaseProfile& p, int samples) {
  if (p.k != 2 && p.k != 3) throw std::invalid_argument("phase profile: k must be 2 or 3");
  if (!(p.c > 0.0)) throw std::invalid_argument("phase profile: c must be positive");
  const auto& der = p.k == 2 ? p.d2psi : p.d3psi;
  for (int i = 0; i <= samples; ++i) {
    double x = p.a + (p.b - p.a) * i / samples;
    if (std::abs(der(x)) < p.c) return false;
  }
  return true;
}

double vdc_bound(const PhaseProfile& p, double lambda, double h_end,
                 double h_total_variation) {
  if (p.k != 2 && p.k != 3) throw std::invalid_argument("vdc bound: unsupported k");
  if (lambda == 0.0) throw std::invalid_argument("vdc bound: lambda must be nonzero");
  double constant = 5.0 * std::pow(2.0, p.k - 1) - 2.0;  // 8 for k=2, 18 for k=3
  return constant * std::pow(p.c, -1.0 / p.k) * (std::abs(h_end) + h_total_variation) *
         std::pow(std::abs(lambda), -1.0 / p.k);
}

namespace {

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlX[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601700,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601700,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGlW[15] = {
    0.03075324199611727, 0.07036604748810812, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939,  0.1861610000155622,  0.1984314853271116, 0.2025782419255613,
    0.1984314853271116,  0.1861610000155622,  0.1662692058169939, 0.1395706779261543,
    0.1071592204671719,  0.07036604748810812, 0.03075324199611727};
constexpr double kGl7X[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                             0.0,                 0.4058451513773972,  0.7415311855993945,
                             0.9491079123427585};
constexpr double kGl7W[7] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                             0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                             0.1294849661688697};

Complex gl_panel(const PhaseProfile& p, const std::function<double(double)>& h, double lambda,
                 double lo, double hi, int order) {
  const double* xs = order == 15 ? kGlX : kGl7X;
  const double* ws = order == 15 ? kGlW : kGl7W;
  int n = order == 15 ? 15 : 7;
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  Complex acc(0.0, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = mid + half * xs[i];
    double ph = lambda * p.psi(x);
    acc += ws[i] * h(x) * Complex(std::cos(ph), std::sin(ph));
  }
  return acc * half;
}

void panel_recurse(const PhaseProfile& p, const std::function<double(double)>& h, double lambda,
                   double lo, double hi, int depth, QuadResult& out) {
  double span = hi - lo;
  double dp = std::max({std::abs(p.dpsi(lo)), std::abs(p.dpsi(0.5 * (lo + hi))),
                        std::abs(p.dpsi(hi))});
  bool oscillation_ok = std::abs(lambda) * dp * span <= kPi / 4.0;
  if (!oscillation_ok && depth < 24) {
    panel_recurse(p, h, lambda, lo, 0.5 * (lo + hi), depth + 1, out);
    panel_recurse(p, h, lambda, 0.5 * (lo + hi), hi, depth + 1, out);
    return;
  }
  if (!oscillation_ok) out.flagged = true;
  Complex fine = gl_panel(p, h, lambda, lo, hi, 15);
  Complex coarse = gl_panel(p, h, lambda, lo, hi, 7);
  double err = std::abs(fine - coarse);
  if (err > 1e-12 * std::max(1.0, std::abs(fine)) && depth < 24) {
    panel_recurse(p, h, lambda, lo, 0.5 * (lo + hi), depth + 1, out);
    panel_recurse(p, h, lambda, 0.5 * (lo + hi), hi, depth + 1, out);
    return;
  }
  out.value += fine;
  out.error_estimate += err;
}

}  // namespace

QuadResult oscillatory_quadrature(const PhaseProfile& p, const std::function<double(double)>& h,
                                  double lambda) {
  QuadResult out;
  panel_recurse(p, h, lambda, p.a, p.b, 0, out);
  return out;
}

namespace {

struct Component {
  std::vector<std::size_t> idx;  // grid indices, increasing in E
};

// Maximal runs of in-band, elliptic, sin-xi-included points with a constant layer.
std::vector<Component> included_components(const SpectralGrid& grid, double sin_floor) {
  std::vector<Component> comps;
  Component cur;
  int cur_layer = -2;
  auto flush = [&]() {
    if (cur.idx.size() >= 5) comps.push_back(cur);
    cur.idx.clear();
  };
  for (std::size_t i = 0; i < grid.pts.size(); ++i) {
    const GridPoint& p = grid.pts[i];
    bool included = p.elliptic && p.drho > grid.rho_floor &&
                    std::abs(std::sin(p.xi)) > sin_floor && p.e >= grid.e_lo &&
                    p.e <= grid.e_hi;
    if (!included || p.layer != cur_layer) {
      flush();
      cur_layer = included ? p.layer : -2;
    }
    if (included) cur.idx.push_back(i);
  }
  flush();
  return comps;
}

int layer_run_count(const SpectralGrid& grid) {
  int runs = 0;
  int prev = -2;
  for (const GridPoint& p : grid.pts) {
    if (p.e < grid.e_lo || p.e > grid.e_hi) continue;
    int lab = p.elliptic ? p.layer : -1;
    if (lab != prev) {
      ++runs;
      prev = lab;
    }
  }
  return runs;
}

}  // namespace

double certified_im_bound(const std::vector<double>& h_grid, double m_freq, double t,
                          const SpectralGrid& grid, const OscParams& params,
                          OscBoundBreakdown* breakdown) {
  if (h_grid.size() != grid.pts.size())
    throw std::invalid_argument("certified bound: h grid size mismatch");
  OscBoundBreakdown local;
  double sup_h = 0.0;
  for (double v : h_grid) sup_h = std::max(sup_h, std::abs(v));
  double abs_t = std::abs(t);
  double t_bracket = std::sqrt(1.0 + t * t);

  double sin_floor = params.sin_xi_floor;
  if (sin_floor < 0.0) {
    sin_floor = 1.5 * std::pow(grid.eps_last, 1.0 / 20.0);
    if (sin_floor >= 0.9) sin_floor = 0.05;  // degenerate at reachable eps; use working floor
  }
  double floor3 = params.floor3;
  if (floor3 < 0.0) floor3 = 1.0 - std::pow(grid.eps0, 1.0 / 3.0);

  double total = 0.0;

  if (std::abs(m_freq) >= (32.0 / 5.0) * std::pow(t_bracket, 4.0 / 3.0)) {
    local.large_m_branch = true;
    local.components = layer_run_count(grid);
    local.boundary_terms =
        (32.0 / 15.0) / std::abs(m_freq) *
        (static_cast<double>(local.components) + (grid.e_hi - grid.e_lo) * t_bracket);
    total = local.boundary_terms;
    if (breakdown) *breakdown = local;
    return total;
  }

  std::vector<Component> comps = included_components(grid, sin_floor);
  local.components = static_cast<int>(comps.size());

  // mass of everything outside the included components, plus the caps from
  // rho = 0 and up to rho = pi not covered by grid cells
  std::vector<char> covered(grid.pts.size(), 0);
  for (const auto& c : comps)
    for (std::size_t i : c.idx) covered[i] = 1;
  for (std::size_t i = 0; i + 1 < grid.pts.size(); ++i) {
    if (covered[i] && covered[i + 1]) continue;
    double drho = grid.pts[i + 1].rho - grid.pts[i].rho;
    if (drho > 0.0)
      local.excluded_mass +=
          drho * std::max(std::abs(h_grid[i]), std::abs(h_grid[i + 1]));
  }
  local.excluded_mass += std::max(grid.pts.front().rho, 0.0) * std::abs(h_grid.front());
  local.excluded_mass += std::max(kPi - grid.pts.back().rho, 0.0) * std::abs(h_grid.back());

  for (const auto& comp : comps) {
    const auto& idx = comp.idx;
    std::size_t n = idx.size();
    // second/third derivatives of E as a function of rho via centered differences
    std::vector<double> d2(n, 0.0), d3(n, 0.0);
    auto rho_at = [&](std::size_t i) { return grid.pts[idx[i]].rho; };
    auto e_at = [&](std::size_t i) { return grid.pts[idx[i]].e; };
    for (std::size_t i = 2; i + 2 < n; ++i) {
      double h1 = rho_at(i) - rho_at(i - 1), h2 = rho_at(i + 1) - rho_at(i);
      if (h1 <= 0 || h2 <= 0) continue;
      double d1m = (e_at(i) - e_at(i - 1)) / h1;
      double d1p = (e_at(i + 1) - e_at(i)) / h2;
      d2[i] = 2.0 * (d1p - d1m) / (h1 + h2);
    }
    for (std::size_t i = 2; i + 2 < n; ++i) {
      double h1 = rho_at(i) - rho_at(i - 1), h2 = rho_at(i + 1) - rho_at(i);
      if (h1 <= 0 || h2 <= 0) continue;
      d3[i] = (d2[i + 1] - d2[i - 1]) / (h1 + h2);
    }
    std::size_t first3 = n, last3 = 0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
      if (std::abs(d3[i]) >= floor3) {
        first3 = std::min(first3, i);
        last3 = std::max(last3, i);
      }
    }
    double comp_mass = rho_at(n - 1) - rho_at(0);
    double abs_bound = sup_h * std::max(comp_mass, 0.0);
    double comp_bound = 0.0;
    bool comp_fallback = false;

    auto piece_bound = [&](std::size_t lo, std::size_t hi, int k_order) {
      if (hi <= lo) return 0.0;
      double c_floor = std::numeric_limits<double>::infinity();
      for (std::size_t i = std::max<std::size_t>(lo, 2); i <= std::min(hi, n - 3); ++i)
        c_floor = std::min(c_floor, std::abs(k_order == 3 ? d3[i] : d2[i]));
      double mass = rho_at(hi) - rho_at(lo);
      double piece_sup = 0.0, tv = 0.0;
      for (std::size_t i = lo; i <= hi; ++i) {
        piece_sup = std::max(piece_sup, std::abs(h_grid[idx[i]]));
        if (i > lo) tv += std::abs(h_grid[idx[i]] - h_grid[idx[i - 1]]);
      }
      double trivial = piece_sup * mass;
      if (!std::isfinite(c_floor) || c_floor < params.c2_min || abs_t < 1.0) {
        if (c_floor < params.c2_min && abs_t >= 1.0) comp_fallback = true;
        return trivial;
      }
      double amp = std::abs(h_grid[idx[hi]]) + tv;
      double constant = k_order == 3 ? 18.0 : 8.0;
      double vdc = constant * std::pow(c_floor, -1.0 / k_order) * amp *
                   std::pow(abs_t, -1.0 / k_order);
      return std::min(vdc, trivial);
    };

    if (first3 <= last3) {
      comp_bound += piece_bound(0, first3, 2);
      comp_bound += piece_bound(first3, last3, 3);
      comp_bound += piece_bound(last3, n - 1, 2);
    } else {
      comp_bound += piece_bound(0, n - 1, 2);
    }
    total += std::min(comp_bound, abs_bound);
    local.fallback = local.fallback || comp_fallback;
  }
  local.vdc_terms = total;
  total += local.excluded_mass;
  if (breakdown) *breakdown = local;
  return total;
}

OscIntegralResult spectral_osc_integral(const std::vector<double>& h_grid, double m_freq,
                                        double t, const SpectralGrid& grid,
                                        const OscParams& params) {
  if (h_grid.size() != grid.pts.size())
    throw std::invalid_argument("oscillatory integral: h grid size mismatch");
  OscIntegralResult out;
  const double g3 = std::sqrt(3.0 / 5.0);
  const double nodes[3] = {-g3, 0.0, g3};
  const double wts[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i + 1 < grid.pts.size(); ++i) {
    double r0 = grid.pts[i].rho, r1 = grid.pts[i + 1].rho;
    double drho = r1 - r0;
    if (drho <= 0.0) continue;
    double e0 = grid.pts[i].e, e1 = grid.pts[i + 1].e;
    double h0 = h_grid[i], h1 = h_grid[i + 1];
    // split the cell until the phase advance per sub-cell is modest
    double phase_span = std::abs(t) * std::abs(e1 - e0) + std::abs(m_freq) * drho;
    int splits = std::max(1, static_cast<int>(std::ceil(phase_span / 0.5)));
    for (int s = 0; s < splits; ++s) {
      double a = static_cast<double>(s) / splits, b = static_cast<double>(s + 1) / splits;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int gq = 0; gq < 3; ++gq) {
        double u = mid + half * nodes[gq];
        double rho = r0 + u * drho;
        double e = e0 + u * (e1 - e0);
        double h = h0 + u * (h1 - h0);
        double w = wts[gq] * half * drho;
        acc += w * h * std::cos(m_freq * rho) * Complex(std::cos(-e * t), std::sin(-e * t));
      }
    }
  }
  // end caps: rho runs to 0 and pi where the energy is pinned at the band edge
  auto cap = [&](double rho_lo, double rho_hi, double e, double h) {
    if (rho_hi <= rho_lo) return;
    int splits = std::max(1, static_cast<int>(std::ceil(
                                  (std::abs(t) * 1e-3 + std::abs(m_freq) * (rho_hi - rho_lo)) /
                                  0.5)));
    Complex phase(std::cos(-e * t), std::sin(-e * t));
    for (int s = 0; s < splits; ++s) {
      double a = rho_lo + (rho_hi - rho_lo) * s / splits;
      double b = rho_lo + (rho_hi - rho_lo) * (s + 1) / splits;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int gq = 0; gq < 3; ++gq) {
        double rho = mid + half * nodes[gq];
        acc += wts[gq] * half * h * std::cos(m_freq * rho) * phase;
      }
    }
  };
  cap(0.0, grid.pts.front().rho, grid.pts.front().e, h_grid.front());
  cap(grid.pts.back().rho, kPi, grid.pts.back().e, h_grid.back());
  out.direct = acc;
  out.bound = certified_im_bound(h_grid, m_freq, t, grid, params, &out.breakdown);
  return out;
}

}  // namespace qpdl
