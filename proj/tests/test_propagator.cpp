#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qpdl/propagator.hpp"

using namespace qpdl;

static Eigen::VectorXd th0(const Frequency& f) { return Eigen::VectorXd::Zero(f.dim()); }

TEST_CASE("bessel sequence against the integral representation") {
  for (double x : {0.5, 1.0, 10.0, 100.0}) {
    std::vector<double> j = bessel_j_sequence(x, 30);
    for (int n = 0; n <= 20; ++n)
      CHECK(j[n] == doctest::Approx(oracle::bessel_j(n, x)).epsilon(1e-11));
  }
  std::vector<double> z = bessel_j_sequence(0.0, 5);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 0.0);
}

TEST_CASE("free evolution matches the bessel formula") {
  Frequency freq = Frequency::golden();
  ScalarFourier zero = ScalarFourier::zero();
  LatticeState q0 = LatticeState::delta(200);

  SUBCASE("t = 0 is the identity") {
    LatticeState q = evolve(q0, 0.0, zero, th0(freq), freq);
    CHECK((q.values - q0.values).norm() == 0.0);
  }

  SUBCASE("t = 5 profile") {
    LatticeState q = evolve(q0, 5.0, zero, th0(freq), freq);
    CHECK(std::abs(q.at(0)) == doctest::Approx(0.2459357644513483).epsilon(1e-10));
    Complex iu(0.0, 1.0);
    double worst = 0.0;
    for (int n = -50; n <= 50; ++n) {
      Complex expect = std::pow(iu, n) * oracle::bessel_j(std::abs(n), 10.0);
      if (n < 0 && (n % 2)) expect = -expect;  // J_{-n} = (-1)^n J_n
      worst = std::max(worst, std::abs(q.at(n) - expect));
    }
    CHECK(worst <= 1e-10);
  }

  SUBCASE("window precondition is enforced") {
    CHECK_THROWS_AS(evolve(q0, 100.0, zero, th0(freq), freq), std::invalid_argument);
  }
}

TEST_CASE("propagator invariants") {
  Frequency freq = Frequency::golden();
  ScalarFourier v = ScalarFourier::cosine(0.01);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  LatticeState q0(400);
  for (int n = -20; n <= 20; ++n) q0.at(n) = Complex(unif(rng), unif(rng));

  SUBCASE("unitarity and energy conservation") {
    double e0 = q0.values.dot(apply_h(v, th0(freq), freq, q0).values).real();
    LatticeState q = evolve(q0, 50.0, v, th0(freq), freq);
    CHECK(q.l2_norm() == doctest::Approx(q0.l2_norm()).epsilon(1e-10));
    double e1 = q.values.dot(apply_h(v, th0(freq), freq, q).values).real();
    CHECK(e1 == doctest::Approx(e0).epsilon(1e-9));
  }

  SUBCASE("superposition") {
    LatticeState p0(400);
    for (int n = -20; n <= 20; ++n) p0.at(n) = Complex(unif(rng), unif(rng));
    LatticeState combo(400);
    combo.values = 0.7 * q0.values + Complex(0.0, 1.3) * p0.values;
    LatticeState ec = evolve(combo, 20.0, v, th0(freq), freq);
    LatticeState eq = evolve(q0, 20.0, v, th0(freq), freq);
    LatticeState ep = evolve(p0, 20.0, v, th0(freq), freq);
    Eigen::VectorXcd expect = 0.7 * eq.values + Complex(0.0, 1.3) * ep.values;
    CHECK((ec.values - expect).cwiseAbs().maxCoeff() <= 1e-12 * expect.norm());
  }

  SUBCASE("group property") {
    LatticeState two_leg = evolve(evolve(q0, 31.0, v, th0(freq), freq), 42.0, v, th0(freq), freq);
    LatticeState direct = evolve(q0, 73.0, v, th0(freq), freq);
    CHECK((two_leg.values - direct.values).cwiseAbs().maxCoeff() <= 1e-9);
  }

  SUBCASE("time reversal") {
    LatticeState fwd = evolve(q0, 37.0, v, th0(freq), freq);
    LatticeState conj_fwd = fwd;
    conj_fwd.values = fwd.values.conjugate();
    LatticeState back = evolve(conj_fwd, 37.0, v, th0(freq), freq);
    CHECK((back.values - q0.values.conjugate()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("evolution against the dense matrix exponential") {
  Frequency freq = Frequency::golden();
  ScalarFourier v = ScalarFourier::cosine(0.05);
  LatticeState q0 = LatticeState::delta(200);
  LatticeState q = evolve(q0, 20.0, v, th0(freq), freq);
  Eigen::VectorXd diag = potential_diagonal(v, th0(freq), freq, 200);
  Eigen::VectorXcd dense = oracle::dense_expm(diag, q0.values, 20.0);
  CHECK((q.values - dense).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("decay profile of the free propagator") {
  Frequency freq = Frequency::golden();
  std::vector<double> times;
  for (double t = 10.0; t <= 320.0; t *= 2.0) times.push_back(t);
  DecayProfile p =
      decay_profile(LatticeState::delta(2048), times, ScalarFourier::zero(), th0(freq), freq);
  REQUIRE(p.times.size() == times.size());
  CHECK_FALSE(p.boundary_reached);
  CHECK(p.slope >= -0.40);
  CHECK(p.slope <= -0.28);
  for (double l2 : p.l2_norms) CHECK(l2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral reconstruction of the evolution") {
  Frequency freq = Frequency::golden();

  SUBCASE("free case against the bessel formula") {
    KamSchedule sched = KamSchedule::make(1e-3, 0, 20);
    SpectralGrid grid = build_grid_rho_uniform(ScalarFourier::zero(), freq, sched, 0, 3000);
    EigTable table = build_eigenfunction_table(grid, th0(freq), freq, 60);
    LatticeState phi = LatticeState::delta(60);
    LatticeState rec = reconstruct_evolution(phi, 5.0, table, grid);
    Complex iu(0.0, 1.0);
    double worst = 0.0;
    for (int n = -30; n <= 30; ++n) {
      Complex expect = std::pow(iu, n) * oracle::bessel_j(std::abs(n), 10.0);
      if (n < 0 && (n % 2)) expect = -expect;
      worst = std::max(worst, std::abs(rec.at(n) - expect));
    }
    CHECK(worst <= 1e-3);
  }

  SUBCASE("coarse grids are refused for fast phases") {
    KamSchedule sched = KamSchedule::make(1e-3, 0, 20);
    SpectralGrid grid = build_grid_rho_uniform(ScalarFourier::zero(), freq, sched, 0, 64);
    EigTable table = build_eigenfunction_table(grid, th0(freq), freq, 20);
    CHECK_THROWS_AS(reconstruct_evolution(LatticeState::delta(20), 50.0, table, grid),
                    std::invalid_argument);
  }
}
