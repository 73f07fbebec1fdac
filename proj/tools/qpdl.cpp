#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "qpdl/config.hpp"
#include "qpdl/csv.hpp"
#include "qpdl/kam.hpp"
#include "qpdl/nls.hpp"
#include "qpdl/oscillatory.hpp"
#include "qpdl/propagator.hpp"
#include "qpdl/spectral.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

using namespace qpdl;

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    for (const auto& kv : overrides) {
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got " + kv);
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    fs::create_directories(out_dir);
    return cfg;
  }
  std::string path(const std::string& name) const { return out_dir + "/" + name; }
};

void require_at_least(const char* what, long value, long floor) {
  if (value < floor)
    throw std::invalid_argument(std::string(what) + " must be at least " +
                                std::to_string(floor));
}

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "key=value config file");
  cmd->add_option("--out", common.out_dir, "output directory");
  cmd->add_option("--set", common.overrides, "override config entries (key=value)");
}

int run_rotno(const Common& common, double emin, double emax, int points, long nmax) {
  require_at_least("points", points, 2);
  require_at_least("nmax", nmax, 1000);
  RunConfig cfg = common.load();
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(freq.dim());
  std::vector<std::array<double, 4>> rows(points);
  parallel_for(points, [&](std::size_t i) {
    double e = emin + (emax - emin) * static_cast<double>(i) / (points - 1);
    RotationEstimate r = rotation_number(e, v, theta, freq, nmax);
    double ly = lyapunov_exponent(e, v, theta, freq, std::max(1000L, nmax / 10));
    rows[i] = {e, r.value, r.oscillation, ly};
  });
  CsvWriter csv(common.path("rotno.csv"), "E,rho,oscillation,lyapunov");
  for (auto& r : rows) csv.row({r[0], r[1], r[2], r[3]});
  std::cout << "rotno: wrote " << points << " rows to " << common.path("rotno.csv") << "\n";
  return 0;
}

int run_ids(const Common& common, double emin, double emax, int points, int half_width,
            int theta_samples) {
  require_at_least("points", points, 2);
  require_at_least("N", half_width, 2);
  require_at_least("theta-samples", theta_samples, 1);
  RunConfig cfg = common.load();
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(freq.dim());
  CsvWriter csv(common.path("ids.csv"), "E,ids,pi_ids");
  for (int i = 0; i < points; ++i) {
    double e = emin + (emax - emin) * i / (points - 1);
    double n = ids(e, v, freq, half_width, theta_samples, theta0);
    csv.row({e, n, kPi * n});
  }
  std::cout << "ids: wrote " << points << " rows to " << common.path("ids.csv") << "\n";
  return 0;
}

int run_kam_reduce(const Common& common, double e, int levels, double eps0, int nmin) {
  RunConfig cfg = common.load();
  if (eps0 > 0.0) cfg.set("schedule.eps0", std::to_string(eps0));
  if (nmin > 0) cfg.set("schedule.nmin", std::to_string(nmin));
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  KamSchedule sched = cfg.schedule(levels);
  ReducedCocycle st = reduce(e, v, freq, sched, levels);
  std::printf("# E = %.12g, J = %d, eps0 = %.3g\n", e, levels, sched.eps0);
  std::printf("%3s %6s %14s %14s %12s %12s %10s\n", "j", "N_j", "|F_j|", "|F_j+1|",
              "min_div", "|W|", "resonance");
  for (const auto& s : st.step_log) {
    std::string res = "-";
    if (s.resonant_k.size() && s.resonant_k.cwiseAbs().maxCoeff() > 0) {
      std::ostringstream os;
      os << s.resonant_k.transpose();
      res = os.str();
    }
    std::printf("%3d %6d %14.6e %14.6e %12.4e %12.4e %10s\n", s.j, s.n_trunc,
                s.f_norm_before, s.f_norm_after, s.min_divisor, s.w_norm, res.c_str());
  }
  for (std::size_t l = 0; l < st.resonances.size(); ++l)
    if (st.resonances[l].size() && st.resonances[l].cwiseAbs().maxCoeff() > 0)
      std::printf("resonant rotation at step %zu: k = %d\n", l, st.resonances[l][0]);
  std::printf("xi = %.12g, kappa = %.4g, rho_J = %.12g, layer = %d\n", st.xi, st.kappa,
              st.rho, st.layer());
  std::printf("conjugacy residual: series %.3e, grid %.3e\n", st.residual_norm,
              conjugacy_residual_grid(st, freq));
  return 0;
}

int run_kam_partition(const Common& common, double emin, double emax, int points, int levels) {
  require_at_least("points", points, 2);
  require_at_least("J", levels, 0);
  RunConfig cfg = common.load();
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  KamSchedule sched = cfg.schedule(levels);
  std::vector<std::array<double, 5>> rows(points);
  parallel_for(points, [&](std::size_t i) {
    double e = emin + (emax - emin) * static_cast<double>(i) / (points - 1);
    try {
      ReducedCocycle st = reduce(e, v, freq, sched, levels);
      rows[i] = {e, static_cast<double>(st.layer()), st.xi, st.rho,
                 st.elliptic ? 0.0 : 1.0};
    } catch (const KamError&) {
      rows[i] = {e, -1.0, 0.0, 0.0, 0.0};
    }
  });
  CsvWriter csv(common.path("partition.csv"), "E,layer,xi,rho_J,alpha_imag_flag");
  for (auto& r : rows) csv.row({r[0], r[1], r[2], r[3], r[4]});
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = emin + (emax - emin) * i / (points - 1);
  SpectralPartition part = partition_spectrum(v, freq, sched, levels, grid);
  std::cout << "kam-partition: " << part.component_count << " components (proxy bound "
            << part.component_bound_proxy << "), csv at " << common.path("partition.csv")
            << "\n";
  return 0;
}

int run_spectral_roundtrip(const Common& common, double eps, int levels, int grid_points,
                           int window) {
  require_at_least("grid-points", grid_points, 8);
  require_at_least("window", window, 2);
  RunConfig cfg = common.load();
  if (eps > 0.0) {
    cfg.set("potential.eps", std::to_string(eps));
    cfg.set("schedule.eps0", std::to_string(eps));
  }
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  KamSchedule sched = cfg.schedule(levels);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(freq.dim());
  SpectralGrid grid = build_grid_rho_uniform(v, freq, sched, levels, grid_points);
  EigTable table = build_eigenfunction_table(grid, theta, freq, window);

  std::mt19937_64 rng(cfg.seed());
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<LatticeState> samples;
  int support = std::max(4, window / 2);
  for (int s = 0; s < 10; ++s) {
    LatticeState q(window);
    for (int n = -support; n <= support; ++n) q.at(n) = Complex(unif(rng), unif(rng));
    samples.push_back(std::move(q));
  }
  auto [lo, hi] = frame_bounds(samples, table, grid);
  double worst = 0.0;
  for (const auto& q : samples) {
    SpectralVector g = spectral_transform(q, table, grid);
    LatticeState back = inverse_transform(g, table, grid, window);
    double err = 0.0;
    for (int n = -window; n <= window; ++n) err = std::max(err, std::abs(back.at(n) - q.at(n)));
    worst = std::max(worst, err / q.sup_norm());
  }
  std::printf("frame bounds: [%.6f, %.6f]\n", lo, hi);
  std::printf("worst round-trip error (relative sup): %.6f\n", worst);

  SpectralVector g = spectral_transform(LatticeState::delta(window), table, grid);
  CsvWriter csv(common.path("spectral.csv"), "E,rho,drho,g1_re,g1_im,g2_re,g2_im");
  for (std::size_t i = 0; i < grid.pts.size(); ++i)
    csv.row({grid.pts[i].e, grid.pts[i].rho, grid.pts[i].drho, g.g[i][0].real(),
             g.g[i][0].imag(), g.g[i][1].real(), g.g[i][1].imag()});
  return 0;
}

int run_osc_check(const Common& common, double eps, int levels,
                  const std::vector<double>& t_list, const std::vector<double>& m_list,
                  int grid_points) {
  RunConfig cfg = common.load();
  if (eps > 0.0) {
    cfg.set("potential.eps", std::to_string(eps));
    cfg.set("schedule.eps0", std::to_string(eps));
  }
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  KamSchedule sched = cfg.schedule(levels);
  SpectralGrid grid = build_grid_rho_uniform(v, freq, sched, levels, grid_points);
  std::vector<double> h(grid.pts.size(), 1.0);
  CsvWriter csv(common.path("osc.csv"), "t,M,direct_re,direct_im,bound,violated_flag");
  for (double t : t_list) {
    for (double m : m_list) {
      OscIntegralResult r = spectral_osc_integral(h, m, t, grid);
      double violated =
          (std::abs(r.direct) > r.bound && !r.breakdown.fallback) ? 1.0 : 0.0;
      csv.row({t, m, r.direct.real(), r.direct.imag(), r.bound, violated});
    }
  }
  std::cout << "osc-check: wrote " << t_list.size() * m_list.size() << " rows to "
            << common.path("osc.csv") << "\n";
  return 0;
}

LatticeState make_datum(const std::string& spec, int half_width) {
  if (spec == "delta") return LatticeState::delta(half_width);
  if (spec.rfind("gaussian(", 0) == 0 && spec.back() == ')') {
    double w = std::stod(spec.substr(9, spec.size() - 10));
    return LatticeState::gaussian(half_width, w);
  }
  throw std::invalid_argument("datum must be delta or gaussian(width)");
}

int run_evolve(const Common& common, double eps, double t, const std::string& datum,
               int half_width) {
  require_at_least("N", half_width, 1);
  RunConfig cfg = common.load();
  if (eps >= 0.0) cfg.set("potential.eps", std::to_string(eps));
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(freq.dim());
  LatticeState q0 = make_datum(datum, half_width);
  LatticeState q = evolve(q0, t, v, theta, freq);
  CsvWriter csv(common.path("evolve.csv"), "n,re,im,abs");
  for (int n = -half_width; n <= half_width; ++n)
    csv.row({static_cast<double>(n), q.at(n).real(), q.at(n).imag(), std::abs(q.at(n))});
  std::printf("evolve: t = %g, sup = %.12g, l2 = %.12g\n", t, q.sup_norm(), q.l2_norm());
  return 0;
}

int run_decay_fit(const Common& common, double eps, double tmax, int points,
                  int theta_sweep, int half_width) {
  require_at_least("points", points, 2);
  require_at_least("theta-sweep", theta_sweep, 1);
  if (!(tmax > 10.0)) throw std::invalid_argument("tmax must exceed the transient range 10");
  RunConfig cfg = common.load();
  if (eps >= 0.0) cfg.set("potential.eps", std::to_string(eps));
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  std::vector<double> times;
  for (int i = 0; i < points; ++i)
    times.push_back(10.0 * std::pow(tmax / 10.0, static_cast<double>(i) / (points - 1)));
  int n = half_width > 0
              ? half_width
              : static_cast<int>(std::ceil(2.0 * (2.0 + v.sup_bound()) * tmax + 60.0));

  json summary;
  summary["theta_count"] = theta_sweep;
  summary["window"] = n;
  json slopes = json::array();
  std::vector<DecayProfile> profiles(theta_sweep);
  parallel_for(theta_sweep, [&](std::size_t s) {
    Eigen::VectorXd theta =
        Eigen::VectorXd::Constant(freq.dim(), kTwoPi * static_cast<double>(s) / theta_sweep);
    profiles[s] = decay_profile(LatticeState::delta(n), times, v, theta, freq);
  });
  CsvWriter csv(common.path("decay.csv"), "theta_index,t,sup_norm,l2_norm");
  for (int s = 0; s < theta_sweep; ++s) {
    const DecayProfile& p = profiles[s];
    for (std::size_t i = 0; i < p.times.size(); ++i)
      csv.row({static_cast<double>(s), p.times[i], p.sup_norms[i], p.l2_norms[i]});
    slopes.push_back({{"theta_index", s},
                      {"slope", p.slope},
                      {"slope_err", p.slope_err},
                      {"boundary_reached", p.boundary_reached},
                      {"fit_points", p.fit_points}});
  }
  summary["fits"] = slopes;
  double lo = 1e300, hi = -1e300;
  for (const auto& p : profiles) {
    lo = std::min(lo, p.slope);
    hi = std::max(hi, p.slope);
  }
  summary["slope_min"] = lo;
  summary["slope_max"] = hi;
  std::ofstream(common.path("decay_fit.json")) << summary.dump(2) << "\n";
  std::printf("decay-fit: slopes in [%.4f, %.4f], artifacts in %s\n", lo, hi,
              common.out_dir.c_str());
  return 0;
}

int run_nls(const Common& common, double p, double zeta, double delta0, double tmax,
            double dt, double eps) {
  RunConfig cfg = common.load();
  if (eps >= 0.0) cfg.set("potential.eps", std::to_string(eps));
  Frequency freq = cfg.frequency();
  ScalarFourier v = cfg.potential();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(freq.dim());
  double radius = 2.0 + v.sup_bound();
  int window = static_cast<int>(std::ceil(2.0 * radius * tmax + 60.0));

  LatticeState lin_datum = LatticeState::delta(window);
  double k1 = measure_k1(lin_datum, zeta, tmax, v, theta, freq);
  double mu = zeta * (p - 2.0);
  double c1 = convolution_constant(zeta, mu, {0.0, 1.0, 10.0, 100.0, 1000.0});
  double delta_star = std::pow(c1 * std::pow(4.0 * k1, p - 2.0), -1.0 / (p - 1.0));
  if (delta0 <= 0.0) delta0 = delta_star / 10.0;

  LatticeState phi = LatticeState::delta(window);
  phi.values *= delta0;
  if (dt <= 0.0) dt = 0.09 / (radius + std::pow(phi.sup_norm(), p - 1.0));
  NlsTrajectory traj = nls_evolve(phi, p, +1, tmax, dt, v, theta, freq);

  NlsRun run;
  run.p = p;
  run.zeta = zeta;
  run.delta0 = delta0;
  run.k1 = k1;
  run.c1 = c1;
  run.delta_star = delta_star;
  run.times = traj.times;
  run.sup_norms = traj.sup_norms;
  run.l2_norms = traj.l2_norms;
  run.truncated = traj.truncated;
  BootstrapVerdict verdict = bootstrap_check(run);

  CsvWriter csv(common.path("nls.csv"), "t,sup_norm,l2_norm,weighted_sup");
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    double t = traj.times[i];
    csv.row({t, traj.sup_norms[i], traj.l2_norms[i],
             std::pow(1.0 + t * t, 0.5 * zeta) * traj.sup_norms[i]});
  }
  json out = {{"p", p},
              {"zeta", zeta},
              {"delta0", delta0},
              {"k1", k1},
              {"c1", c1},
              {"delta_star", delta_star},
              {"margin", verdict.margin},
              {"sup_weighted", verdict.sup_weighted},
              {"passes", verdict.passes},
              {"truncated", verdict.truncated}};
  std::ofstream(common.path("nls_bootstrap.json")) << out.dump(2) << "\n";
  std::printf("nls: margin %.4f (%s), artifacts in %s\n", verdict.margin,
              verdict.passes ? "passes" : "fails", common.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-periodic lattice dispersion laboratory"};
  app.require_subcommand(1);

  Common common;
  double emin = -2.2, emax = 2.2, e_single = 0.0, eps = -1.0, t = 1.0, tmax = 500.0;
  double p_exp = 6.0, zeta = 0.3, delta0 = -1.0, dt = -1.0, eps0 = -1.0;
  int points = 101, nmax_i = 100000, half_width = 400, theta_samples = 16, levels = 2;
  int grid_points = 2000, window = 24, theta_sweep = 8, nmin = -1;
  std::vector<double> t_list = {1.0, 10.0, 100.0};
  std::vector<double> m_list = {0.0, 1.0, 10.0};
  std::string datum = "delta";

  auto* rotno = app.add_subcommand("rotno", "rotation number sweep");
  add_common(rotno, common);
  rotno->add_option("--emin", emin);
  rotno->add_option("--emax", emax);
  rotno->add_option("--points", points);
  rotno->add_option("--nmax", nmax_i);

  auto* idsc = app.add_subcommand("ids", "integrated density of states");
  add_common(idsc, common);
  idsc->add_option("--emin", emin);
  idsc->add_option("--emax", emax);
  idsc->add_option("--points", points);
  idsc->add_option("--N", half_width);
  idsc->add_option("--theta-samples", theta_samples);

  auto* kred = app.add_subcommand("kam-reduce", "single-energy reduction step table");
  add_common(kred, common);
  kred->add_option("--E", e_single);
  kred->add_option("--J", levels);
  kred->add_option("--eps0", eps0);
  kred->add_option("--nmin", nmin);

  auto* kpart = app.add_subcommand("kam-partition", "resonance-layer partition sweep");
  add_common(kpart, common);
  kpart->add_option("--emin", emin);
  kpart->add_option("--emax", emax);
  kpart->add_option("--points", points);
  kpart->add_option("--J", levels);

  auto* sround = app.add_subcommand("spectral-roundtrip", "frame bounds and inversion error");
  add_common(sround, common);
  sround->add_option("--eps", eps);
  sround->add_option("--J", levels);
  sround->add_option("--grid-points", grid_points);
  sround->add_option("--window", window);

  auto* osc = app.add_subcommand("osc-check", "oscillatory integral vs certified bound");
  add_common(osc, common);
  osc->add_option("--eps", eps);
  osc->add_option("--J", levels);
  osc->add_option("--t-list", t_list);
  osc->add_option("--M-list", m_list);
  osc->add_option("--grid-points", grid_points);

  auto* evo = app.add_subcommand("evolve", "single time evolution");
  add_common(evo, common);
  evo->add_option("--eps", eps);
  evo->add_option("--t", t);
  evo->add_option("--datum", datum);
  evo->add_option("--N", half_width);

  auto* dfit = app.add_subcommand("decay-fit", "dispersive decay exponent fit");
  add_common(dfit, common);
  dfit->add_option("--eps", eps);
  dfit->add_option("--tmax", tmax);
  dfit->add_option("--points", points);
  dfit->add_option("--theta-sweep", theta_sweep);
  dfit->add_option("--N", half_width)->default_val(0);

  auto* nlsc = app.add_subcommand("nls", "small-data decay bootstrap");
  add_common(nlsc, common);
  nlsc->add_option("--p", p_exp);
  nlsc->add_option("--zeta", zeta);
  nlsc->add_option("--delta0", delta0);
  nlsc->add_option("--tmax", tmax);
  nlsc->add_option("--dt", dt);
  nlsc->add_option("--eps", eps);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rotno->parsed()) return run_rotno(common, emin, emax, points, nmax_i);
    if (idsc->parsed()) return run_ids(common, emin, emax, points, half_width, theta_samples);
    if (kred->parsed()) return run_kam_reduce(common, e_single, levels, eps0, nmin);
    if (kpart->parsed()) return run_kam_partition(common, emin, emax, points, levels);
    if (sround->parsed())
      return run_spectral_roundtrip(common, eps, levels, grid_points, window);
    if (osc->parsed()) return run_osc_check(common, eps, levels, t_list, m_list, grid_points);
    if (evo->parsed()) return run_evolve(common, eps, t, datum, half_width);
    if (dfit->parsed())
      return run_decay_fit(common, eps, tmax, points, theta_sweep, half_width);
    if (nlsc->parsed()) return run_nls(common, p_exp, zeta, delta0, tmax, dt, eps);
  } catch (const ContractViolation& e) {
    std::cerr << "numerical contract violated: " << e.what() << "\n";
    return 3;
  } catch (const KamError& e) {
    std::cerr << "reduction failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
