#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qpdl/spectral.hpp"

using namespace qpdl;

static Eigen::VectorXd th0(const Frequency& f) { return Eigen::VectorXd::Zero(f.dim()); }

static double eigen_residual(const std::vector<Complex>& psi, double e,
                             const ScalarFourier& v, const Eigen::VectorXd& theta,
                             const Frequency& freq, int margin) {
  int window = (static_cast<int>(psi.size()) - 1) / 2;
  LatticeState q(window);
  for (int n = -window; n <= window; ++n) q.at(n) = psi[n + window];
  LatticeState hq = apply_h(v, theta, freq, q);
  double worst = 0.0, sup = 0.0;
  for (int n = -window + margin; n <= window - margin; ++n) {
    worst = std::max(worst, std::abs(hq.at(n) - e * q.at(n)));
    sup = std::max(sup, std::abs(q.at(n)));
  }
  return worst / sup;
}

TEST_CASE("bloch waves") {
  Frequency freq = Frequency::golden();

  SUBCASE("free plane wave") {
    KamSchedule sched = KamSchedule::make(1e-3, 1, 20);
    ReducedCocycle st = reduce(0.6, ScalarFourier::zero(), freq, sched, 1);
    std::vector<Complex> psi = bloch_wave(st, th0(freq), freq, 40);
    // constant amplitude profile
    for (const Complex& c : psi) CHECK(std::abs(c) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eigen_residual(psi, 0.6, ScalarFourier::zero(), th0(freq), freq, 1) <= 1e-12);
  }

  SUBCASE("perturbed eigen-residual at depth 2") {
    ScalarFourier v = ScalarFourier::cosine(1e-3);
    KamSchedule sched = KamSchedule::make(1e-3, 2, 20);
    ReducedCocycle st = reduce(0.0, v, freq, sched, 2);
    std::vector<Complex> psi = bloch_wave(st, th0(freq), freq, 60);
    CHECK(eigen_residual(psi, 0.0, v, th0(freq), freq, 10) <= 1e-6);
  }

  SUBCASE("gap energies are refused") {
    ScalarFourier v = ScalarFourier::cosine(0.05);
    KamSchedule sched = KamSchedule::make(0.05, 2, 20);
    ReducedCocycle st = reduce(0.7257, v, freq, sched, 2);  // deep inside the k=1 gap
    REQUIRE_FALSE(st.elliptic);
    CHECK_THROWS_AS(bloch_wave(st, th0(freq), freq, 20), std::invalid_argument);
  }

  SUBCASE("resonant-layer scaling variant") {
    ScalarFourier v = ScalarFourier::cosine(0.05);
    KamSchedule sched = KamSchedule::make(0.05, 1, 20);
    // inside the k=1 resonant band but outside the gap
    ReducedCocycle st = reduce(0.45, v, freq, sched, 1);
    REQUIRE(st.layer() == 1);
    REQUIRE(st.elliptic);
    std::vector<Complex> plain = bloch_wave(st, th0(freq), freq, 20, false);
    std::vector<Complex> scaled = bloch_wave(st, th0(freq), freq, 20, true);
    double factor = std::pow(std::sin(st.xi), 5);
    for (std::size_t i = 0; i < plain.size(); ++i)
      CHECK(std::abs(scaled[i] - factor * plain[i]) <= 1e-14 + 1e-12 * std::abs(plain[i]));
  }
}

TEST_CASE("eigenfunction structure") {
  Frequency freq = Frequency::golden();

  SUBCASE("free three-term weights collapse to the identity") {
    KamSchedule sched = KamSchedule::make(1e-3, 1, 20);
    ReducedCocycle st = reduce(-0.8, ScalarFourier::zero(), freq, sched, 1);
    Eigenfunctions fn = eigenfunctions(st, th0(freq), freq, 30);
    double rho = std::acos(0.4);
    for (int n = -30; n <= 30; ++n) {
      CHECK(fn.k_fn[n + 30] == doctest::Approx(std::sin(n * rho)).epsilon(1e-9));
      CHECK(fn.j_fn[n + 30] == doctest::Approx(std::cos(n * rho)).epsilon(1e-9));
      CHECK(fn.beta_mid[n + 30] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::abs(fn.beta_lo[n + 30]) <= 1e-9);
      CHECK(std::abs(fn.beta_hi[n + 30]) <= 1e-9);
    }
    CHECK(fn.misfit <= 1e-12);
  }

  SUBCASE("perturbed weights stay near the identity") {
    ScalarFourier v = ScalarFourier::cosine(1e-3);
    KamSchedule sched = KamSchedule::make(1e-3, 2, 20);
    ReducedCocycle st = reduce(0.3, v, freq, sched, 2);
    REQUIRE(st.layer() == 0);
    Eigenfunctions fn = eigenfunctions(st, th0(freq), freq, 30);
    for (int i = 0; i < fn.beta_mid.size(); ++i) {
      CHECK(std::abs(fn.beta_mid[i] - 1.0) <= 0.05);
      CHECK(std::abs(fn.beta_lo[i]) <= 0.05);
      CHECK(std::abs(fn.beta_hi[i]) <= 0.05);
    }
  }

  SUBCASE("K and J are independent mid-spectrum") {
    ScalarFourier v = ScalarFourier::cosine(1e-3);
    KamSchedule sched = KamSchedule::make(1e-3, 2, 20);
    ReducedCocycle st = reduce(0.0, v, freq, sched, 2);
    Eigenfunctions fn = eigenfunctions(st, th0(freq), freq, 30);
    // discrete Wronskian of the two families
    double w = fn.k_fn[31] * fn.j_fn[30] - fn.k_fn[30] * fn.j_fn[31];
    CHECK(std::abs(w) >= 0.5 * std::abs(std::sin(st.rho)));
  }
}

TEST_CASE("spectral transform round trips") {
  Frequency freq = Frequency::golden();

  SUBCASE("zero maps to zero") {
    KamSchedule sched = KamSchedule::make(1e-3, 0, 20);
    SpectralGrid grid = build_grid_rho_uniform(ScalarFourier::zero(), freq, sched, 0, 300);
    EigTable table = build_eigenfunction_table(grid, th0(freq), freq, 16);
    LatticeState q(16);
    SpectralVector g = spectral_transform(q, table, grid);
    for (const auto& pair : g.g) CHECK(pair.norm() == 0.0);
  }

  SUBCASE("free delta datum pairs to (0, 1)") {
    KamSchedule sched = KamSchedule::make(1e-3, 0, 20);
    SpectralGrid grid = build_grid_rho_uniform(ScalarFourier::zero(), freq, sched, 0, 300);
    EigTable table = build_eigenfunction_table(grid, th0(freq), freq, 16);
    SpectralVector g = spectral_transform(LatticeState::delta(16), table, grid);
    for (std::size_t i = 0; i < grid.pts.size(); ++i) {
      if (!table.fns[i].valid) continue;
      CHECK(std::abs(g.g[i][0]) <= 1e-12);
      CHECK(std::abs(g.g[i][1] - 1.0) <= 1e-12);
    }
  }

  SUBCASE("free frame bounds on an exact grid") {
    KamSchedule sched = KamSchedule::make(1e-3, 0, 20);
    SpectralGrid grid = build_grid_rho_uniform(ScalarFourier::zero(), freq, sched, 0, 2000);
    EigTable table = build_eigenfunction_table(grid, th0(freq), freq, 24);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<LatticeState> samples;
    for (int s = 0; s < 10; ++s) {
      LatticeState q(24);
      for (int n = -12; n <= 12; ++n) q.at(n) = Complex(unif(rng), unif(rng));
      samples.push_back(std::move(q));
    }
    auto [lo, hi] = frame_bounds(samples, table, grid);
    CHECK(lo >= 1.0 - 1e-3);
    CHECK(hi <= 1.0 + 1e-3);
  }

  SUBCASE("free inverse recovers the delta datum") {
    KamSchedule sched = KamSchedule::make(1e-3, 0, 20);
    SpectralGrid grid = build_grid_rho_uniform(ScalarFourier::zero(), freq, sched, 0, 1500);
    EigTable table = build_eigenfunction_table(grid, th0(freq), freq, 20);
    LatticeState q0 = LatticeState::delta(20);
    SpectralVector g = spectral_transform(q0, table, grid);
    LatticeState back = inverse_transform(g, table, grid, 20);
    double worst = 0.0;
    for (int n = -20; n <= 20; ++n) worst = std::max(worst, std::abs(back.at(n) - q0.at(n)));
    CHECK(worst <= 1e-3);
  }

  SUBCASE("round trip at a nonzero phase") {
    ScalarFourier v = ScalarFourier::cosine(1e-3);
    KamSchedule sched = KamSchedule::make(1e-3, 2, 20);
    SpectralGrid grid = build_grid_rho_uniform(v, freq, sched, 2, 800);
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
    EigTable table = build_eigenfunction_table(grid, theta, freq, 16);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    LatticeState q(16);
    for (int n = -8; n <= 8; ++n) q.at(n) = Complex(unif(rng), unif(rng));
    LatticeState back = inverse_transform(spectral_transform(q, table, grid), table, grid, 16);
    double worst = 0.0;
    for (int n = -16; n <= 16; ++n) worst = std::max(worst, std::abs(back.at(n) - q.at(n)));
    CHECK(worst / q.sup_norm() <= 0.05);
  }

  SUBCASE("perturbed round trip, linearity, and grid-refinement contraction") {
    ScalarFourier v = ScalarFourier::cosine(1e-3);
    KamSchedule sched = KamSchedule::make(1e-3, 2, 20);
    SpectralGrid coarse = build_grid_rho_uniform(v, freq, sched, 2, 500);
    SpectralGrid fine = build_grid_rho_uniform(v, freq, sched, 2, 1000);
    EigTable tc = build_eigenfunction_table(coarse, th0(freq), freq, 20);
    EigTable tf = build_eigenfunction_table(fine, th0(freq), freq, 20);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    LatticeState q(20);
    for (int n = -10; n <= 10; ++n) q.at(n) = Complex(unif(rng), unif(rng));

    auto round_trip_err = [&](const EigTable& t, const SpectralGrid& g) {
      LatticeState back = inverse_transform(spectral_transform(q, t, g), t, g, 20);
      double worst = 0.0;
      for (int n = -20; n <= 20; ++n) worst = std::max(worst, std::abs(back.at(n) - q.at(n)));
      return worst / q.sup_norm();
    };
    double ec = round_trip_err(tc, coarse), ef = round_trip_err(tf, fine);
    CHECK(ec <= 0.05);
    CHECK(ef <= 0.05);  // refinement saturates at the eigenfunction-structure floor

    // linearity of the forward and inverse maps
    LatticeState q2(20);
    for (int n = -10; n <= 10; ++n) q2.at(n) = Complex(unif(rng), unif(rng));
    SpectralVector ga = spectral_transform(q, tf, fine);
    SpectralVector gb = spectral_transform(q2, tf, fine);
    LatticeState combined(20);
    combined.values = 2.0 * q.values - 0.5 * q2.values;
    SpectralVector gc = spectral_transform(combined, tf, fine);
    for (std::size_t i = 0; i < fine.pts.size(); ++i)
      CHECK((gc.g[i] - (2.0 * ga.g[i] - 0.5 * gb.g[i])).norm() <= 1e-12);
    SpectralVector gsum;
    gsum.g.resize(ga.g.size());
    for (std::size_t i = 0; i < ga.g.size(); ++i) gsum.g[i] = 2.0 * ga.g[i] - 0.5 * gb.g[i];
    LatticeState inv_sum = inverse_transform(gsum, tf, fine, 20);
    LatticeState inv_a = inverse_transform(ga, tf, fine, 20);
    LatticeState inv_b = inverse_transform(gb, tf, fine, 20);
    for (int n = -20; n <= 20; ++n)
      CHECK(std::abs(inv_sum.at(n) - (2.0 * inv_a.at(n) - 0.5 * inv_b.at(n))) <= 1e-12);

    // frame scaling invariance
    std::vector<LatticeState> one = {q};
    auto [l1, h1] = frame_bounds(one, tf, fine);
    LatticeState scaled = q;
    scaled.values *= 17.0;
    std::vector<LatticeState> two = {scaled};
    auto [l2, h2] = frame_bounds(two, tf, fine);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    CHECK(h1 == doctest::Approx(h2).epsilon(1e-12));
  }
}
