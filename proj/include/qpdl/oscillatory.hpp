#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "qpdl/spectral.hpp"

namespace qpdl {

/// Phase on an interval with derivative access and a certified lower bound
/// c <= |psi^(k)| (verified on a dense sample).
struct PhaseProfile {
  double a = 0.0, b = 1.0;
  std::function<double(double)> psi;
  std::function<double(double)> dpsi;
  std::function<double(double)> d2psi;
  std::function<double(double)> d3psi;
  int k = 2;       // derivative order, 2 or 3
  double c = 1.0;  // floor for |psi^(k)|
};

/// Check |psi^(k)| >= c on a dense sample of (a, b).
bool verify_profile(const PhaseProfile& p, int samples = 512);

/// (5*2^{k-1} - 2) c^{-1/k} (|h(b)| + Var h) |lambda|^{-1/k}.
double vdc_bound(const PhaseProfile& p, double lambda, double h_end,
                 double h_total_variation);

struct QuadResult {
  Complex value{0.0, 0.0};
  double error_estimate = 0.0;
  bool flagged = false;  // subdivision depth cap reached
};

/// Adaptive panel quadrature of int_a^b h(x) e^{i lambda psi(x)} dx with
/// per-panel oscillation control.
QuadResult oscillatory_quadrature(const PhaseProfile& p, const std::function<double(double)>& h,
                                  double lambda);

struct OscParams {
  double sin_xi_floor = -1.0;  // < 0: (3/2) eps_J^{1/20}, replaced by 0.05 when >= 0.9
  double floor3 = -1.0;        // < 0: 1 - eps0^{1/3}
  double c2_min = 1e-9;        // below this the k=2 floor is treated as failed
  int samples_per_component = 64;
};

struct OscBoundBreakdown {
  double vdc_terms = 0.0;
  double boundary_terms = 0.0;
  double excluded_mass = 0.0;
  int components = 0;
  bool fallback = false;       // some component fell back to its absolute bound
  bool large_m_branch = false;
};

struct OscIntegralResult {
  Complex direct{0.0, 0.0};
  double bound = 0.0;
  OscBoundBreakdown breakdown;
};

/// Certified upper bound for |int h e^{-iEt} cos(M rho) rho' dE| following the
/// component-wise change of variable E(rho) and Van der Corput, or boundary
/// terms plus integration by parts when |M| >= (32/5) <t>^{4/3}.
double certified_im_bound(const std::vector<double>& h_grid, double m_freq, double t,
                          const SpectralGrid& grid, const OscParams& params,
                          OscBoundBreakdown* breakdown = nullptr);

/// Direct quadrature of the spectral oscillatory integral plus its certified bound.
OscIntegralResult spectral_osc_integral(const std::vector<double>& h_grid, double m_freq,
                                        double t, const SpectralGrid& grid,
                                        const OscParams& params = {});

}  // namespace qpdl
