#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qpdl/lattice.hpp"

using namespace qpdl;

static Eigen::VectorXd th0(const Frequency& f) { return Eigen::VectorXd::Zero(f.dim()); }

TEST_CASE("apply_h stencil") {
  Frequency freq = Frequency::golden();

  SUBCASE("free delta") {
    LatticeState q = LatticeState::delta(4);
    LatticeState hq = apply_h(ScalarFourier::zero(), th0(freq), freq, q);
    CHECK(hq.at(0) == Complex(0, 0));
    CHECK(hq.at(1) == Complex(-1, 0));
    CHECK(hq.at(-1) == Complex(-1, 0));
    CHECK(hq.at(2) == Complex(0, 0));
  }

  SUBCASE("cosine potential at theta 0") {
    ScalarFourier v = ScalarFourier::cosine(0.01);
    LatticeState q = LatticeState::delta(4);
    LatticeState hq = apply_h(v, th0(freq), freq, q);
    CHECK(hq.at(0).real() == doctest::Approx(0.02).epsilon(1e-13));
    CHECK(hq.at(1).real() == doctest::Approx(-1.0));
  }

  SUBCASE("eigenvector of the dense truncation") {
    ScalarFourier v = ScalarFourier::cosine(0.05);
    int n = 100;
    Eigen::VectorXd diag = potential_diagonal(v, th0(freq), freq, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(oracle::dense_h(diag));
    int pick = n;  // mid-spectrum eigenpair
    double e = solver.eigenvalues()[pick];
    LatticeState q(n);
    for (int i = -n; i <= n; ++i) q.at(i) = solver.eigenvectors()(i + n, pick);
    LatticeState hq = apply_h(v, th0(freq), freq, q);
    double worst = 0.0;
    for (int i = -n; i <= n; ++i) worst = std::max(worst, std::abs(hq.at(i) - e * q.at(i)));
    CHECK(worst <= 1e-10);
  }

  SUBCASE("symmetry") {
    ScalarFourier v = ScalarFourier::random_analytic(0.2, 0.5, 4, 8);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    LatticeState p(30), q(30);
    for (int i = -30; i <= 30; ++i) {
      p.at(i) = Complex(unif(rng), unif(rng));
      q.at(i) = Complex(unif(rng), unif(rng));
    }
    LatticeState hp = apply_h(v, th0(freq), freq, p);
    LatticeState hq = apply_h(v, th0(freq), freq, q);
    Complex lhs = p.values.dot(hq.values);  // conjugates the left factor
    Complex rhs = hp.values.dot(q.values);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  }
}

TEST_CASE("truncated spectrum") {
  Frequency freq = Frequency::golden();

  SUBCASE("free closed form at N=2") {
    SpectrumSummary s = truncated_spectrum(ScalarFourier::zero(), th0(freq), freq, 2);
    REQUIRE(s.eigenvalues.size() == 5);
    std::vector<double> expect;
    for (int m = 1; m <= 5; ++m) expect.push_back(-2.0 * std::cos(m * kPi / 6.0));
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 5; ++i)
      CHECK(s.eigenvalues[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  }

  SUBCASE("free band fills [-2, 2]") {
    SpectrumSummary s = truncated_spectrum(ScalarFourier::zero(), th0(freq), freq, 500);
    CHECK(s.inf_estimate == doctest::Approx(-2.0).epsilon(1e-4));
    CHECK(s.sup_estimate == doctest::Approx(2.0).epsilon(1e-4));
  }

  SUBCASE("constant shift") {
    ScalarFourier c(1);
    c.set_pair(Eigen::VectorXi::Zero(1), Complex(0.35, 0.0));
    SpectrumSummary base = truncated_spectrum(ScalarFourier::zero(), th0(freq), freq, 40);
    SpectrumSummary moved = truncated_spectrum(c, th0(freq), freq, 40);
    for (std::size_t i = 0; i < base.eigenvalues.size(); ++i)
      CHECK(moved.eigenvalues[i] == doctest::Approx(base.eigenvalues[i] + 0.35).epsilon(1e-12));
  }

  SUBCASE("hull bound") {
    ScalarFourier v = ScalarFourier::random_analytic(0.3, 0.4, 3, 77);
    double cap = 2.0 + v.sup_bound();
    SpectrumSummary s = truncated_spectrum(v, th0(freq), freq, 60);
    CHECK(s.inf_estimate >= -cap - 1e-12);
    CHECK(s.sup_estimate <= cap + 1e-12);
  }
}

TEST_CASE("integrated density of states") {
  Frequency freq = Frequency::golden();
  ScalarFourier v = ScalarFourier::cosine(0.05);
  Eigen::VectorXd theta0 = th0(freq);
  CHECK(ids(-2.2, v, freq, 100, 4, theta0) == 0.0);
  CHECK(ids(2.2, v, freq, 100, 4, theta0) == 1.0);
  CHECK(ids(0.0, ScalarFourier::zero(), freq, 200, 1, theta0) ==
        doctest::Approx(0.5).epsilon(2.0 / 200.0));
  double prev = -1.0;
  for (double e = -2.2; e <= 2.2; e += 0.4) {
    double n = ids(e, v, freq, 80, 4, theta0);
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("gap detection and labeling") {
  Frequency freq = Frequency::golden();

  SUBCASE("free spectrum has no interior gaps") {
    SpectrumSummary s = detect_gaps(ScalarFourier::zero(), freq, 500, 1e-2, 8);
    for (const Gap& g : s.gaps) {
      bool interior = g.lo > -2.0 + 0.05 && g.hi < 2.0 - 0.05;
      CHECK_FALSE(interior);
    }
  }

  SUBCASE("cosine potential: leading gap carries the k=1 label") {
    ScalarFourier v = ScalarFourier::cosine(0.05);
    SpectrumSummary s = detect_gaps(v, freq, 800, 1e-3, 32);
    REQUIRE(!s.gaps.empty());
    // widest gap
    const Gap* widest = nullptr;
    for (const Gap& g : s.gaps)
      if (g.lo + g.hi > 0.0 && (!widest || g.hi - g.lo > widest->hi - widest->lo)) widest = &g;
    REQUIRE(widest != nullptr);
    Eigen::VectorXi k1(1);
    k1 << 1;
    CHECK(circle_pi_dist(widest->rotation, half_resonance(k1, freq)) <= 2e-3);
    auto label = label_gap(widest->rotation, 10, freq, 2e-3);
    REQUIRE(label.has_value());
    CHECK(std::abs((*label)[0]) == 1);

    // ids is flat across the detected gap
    Eigen::VectorXd theta0 = th0(freq);
    double mid_lo = ids(widest->lo + 1e-4, v, freq, 300, 8, theta0);
    double mid_hi = ids(widest->hi - 1e-4, v, freq, 300, 8, theta0);
    CHECK(std::abs(mid_hi - mid_lo) <= 2.0 / 601.0);
  }
}
