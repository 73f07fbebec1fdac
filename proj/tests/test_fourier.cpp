#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "qpdl/fourier.hpp"
#include "qpdl/kam.hpp"

using namespace qpdl;

static Eigen::VectorXd th1(double v) {
  Eigen::VectorXd t(1);
  t << v;
  return t;
}

TEST_CASE("scalar evaluation") {
  ScalarFourier zero = ScalarFourier::zero();
  CHECK(zero.eval(th1(0.3)) == 0.0);

  ScalarFourier v = ScalarFourier::cosine(0.001);
  CHECK(v.eval(th1(0.0)) == doctest::Approx(0.002).epsilon(1e-14));
  CHECK(v.eval(th1(kPi / 3.0)) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(v.reality_ok());
}

TEST_CASE("weighted norm bound") {
  CHECK(ScalarFourier::zero().norm_weighted(0.7) == 0.0);

  ScalarFourier v = ScalarFourier::cosine(0.001);
  CHECK(v.norm_weighted(0.5) == doctest::Approx(0.0032974425414).epsilon(1e-10));
  // exact ratio e^r for the single-harmonic potential
  for (double r : {0.1, 0.25, 0.5, 1.0})
    CHECK(v.norm_weighted(r) / 0.002 == doctest::Approx(std::exp(r)).epsilon(1e-13));

  ScalarFourier c(1);
  c.set_pair(Eigen::VectorXi::Zero(1), Complex(0.37, 0.0));
  for (double r : {0.0, 0.5, 2.0}) CHECK(c.norm_weighted(r) == doctest::Approx(0.37));

  ScalarFourier rnd = ScalarFourier::random_analytic(0.01, 0.5, 6, 42);
  double prev = 0.0;
  for (double r : {0.0, 0.2, 0.4, 0.6}) {
    double n = rnd.norm_weighted(r);
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("evaluation of real series stays real") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    ScalarFourier v = ScalarFourier::random_analytic(0.3, 0.3, 6, seed);
    CHECK(v.reality_ok());
    double scale = v.norm_weighted(0.0);
    for (int trial = 0; trial < 30; ++trial) {
      Complex val = v.eval_complex(th1(unif(rng)));
      CHECK(std::abs(val.imag()) <= 1e-12 * std::max(scale, 1.0));
    }
  }
}

TEST_CASE("shift identity against direct evaluation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  ScalarFourier v = ScalarFourier::random_analytic(0.05, 0.4, 5, 99);
  for (int trial = 0; trial < 100; ++trial) {
    double delta = unif(rng), theta = unif(rng);
    ScalarFourier shifted = v.shifted(th1(delta));
    CHECK(shifted.eval(th1(theta)) ==
          doctest::Approx(v.eval(th1(theta + delta))).epsilon(1e-12));
  }

  ScalarFourier c = ScalarFourier::cosine(1.0);
  ScalarFourier half_turn = c.shifted(th1(kPi));
  Eigen::VectorXi e1(1);
  e1 << 1;
  CHECK(half_turn.coeff(e1).real() == doctest::Approx(-1.0).epsilon(1e-14));
  ScalarFourier unshifted = c.shifted(th1(0.0));
  CHECK(unshifted.coeff(e1).real() == doctest::Approx(1.0));
}

TEST_CASE("matrix series algebra matches pointwise evaluation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_series = [&](int denom) {
    MatrixFourier m(1, denom);
    for (int k = -3; k <= 3; ++k) {
      Eigen::Matrix2cd c;
      c << Complex(unif(rng), unif(rng)), Complex(unif(rng), unif(rng)),
          Complex(unif(rng), unif(rng)), Complex(unif(rng), unif(rng));
      m.add_coeff({k}, 0.1 * c);
    }
    return m;
  };
  MatrixFourier a = random_series(1);
  MatrixFourier b = random_series(2);
  Eigen::VectorXd theta = th1(0.83);
  Eigen::Matrix2cd prod = (a * b).eval(theta);
  Eigen::Matrix2cd direct = a.eval(theta) * b.eval(theta);
  CHECK((prod - direct).norm() == doctest::Approx(0.0).epsilon(1e-12));

  MatrixFourier shifted = a.shifted(th1(0.41));
  CHECK((shifted.eval(theta) - a.eval(th1(0.83 + 0.41))).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));

  MatrixFourier sum = a + a;
  CHECK((sum.eval(theta) - 2.0 * a.eval(theta)).norm() == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("half-angle rotation series") {
  Eigen::VectorXi k(1);
  k << 3;
  MatrixFourier rot = MatrixFourier::half_angle_rotation(k, 1);
  CHECK(rot.denom() == 2);
  for (double theta : {0.0, 0.7, 2.9, -1.3}) {
    Eigen::Matrix2d expected = rot2(1.5 * theta);  // <k,theta>/2 with k = 3
    CHECK((rot.eval_real(th1(theta)) - expected).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0).epsilon(1e-13));
  }
  CHECK(rot.reality_ok());
}

TEST_CASE("neumann inverse") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixFourier w(1, 1);
  for (int k = -2; k <= 2; ++k) {
    Eigen::Matrix2cd c;
    c << Complex(unif(rng), unif(rng)), Complex(unif(rng), unif(rng)),
        Complex(unif(rng), unif(rng)), Complex(unif(rng), unif(rng));
    w.add_coeff({k}, 0.03 * c);
  }
  MatrixFourier inv = neumann_inverse(w);
  Eigen::VectorXd theta = th1(1.9);
  Eigen::Matrix2cd direct = (Eigen::Matrix2cd::Identity() + w.eval(theta)).inverse();
  CHECK((inv.eval(theta) - direct).norm() == doctest::Approx(0.0).epsilon(1e-12));

  MatrixFourier big(1, 1);
  big.add_coeff({0}, Eigen::Matrix2cd::Identity() * 2.0);
  CHECK_THROWS(neumann_inverse(big));
}
