#include "qpdl/fourier.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qpdl {

ModeIndex to_mode(const Eigen::VectorXi& k) {
  return ModeIndex(k.data(), k.data() + k.size());
}

Eigen::VectorXi from_mode(const ModeIndex& m) {
  Eigen::VectorXi k(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) k[static_cast<int>(i)] = m[i];
  return k;
}

int mode_l1(const ModeIndex& m) {
  int s = 0;
  for (int v : m) s += std::abs(v);
  return s;
}

int mode_linf(const ModeIndex& m) {
  int s = 0;
  for (int v : m) s = std::max(s, std::abs(v));
  return s;
}

ModeIndex negated(const ModeIndex& m) {
  ModeIndex n(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) n[i] = -m[i];
  return n;
}

static double mode_dot(const ModeIndex& m, const Eigen::VectorXd& theta) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * theta[static_cast<int>(i)];
  return s;
}

// ----- ScalarFourier -----

Complex ScalarFourier::coeff(const Eigen::VectorXi& k) const {
  auto it = coeffs_.find(to_mode(k));
  return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
}

void ScalarFourier::set_coeff(const Eigen::VectorXi& k, Complex c) {
  if (std::abs(c) == 0.0) {
    coeffs_.erase(to_mode(k));
    return;
  }
  coeffs_[to_mode(k)] = c;
}

void ScalarFourier::set_pair(const Eigen::VectorXi& k, Complex c) {
  set_coeff(k, c);
  set_coeff(-k, std::conj(c));
}

Complex ScalarFourier::eval_complex(const Eigen::VectorXd& theta) const {
  Complex s(0.0, 0.0);
  for (const auto& [m, c] : coeffs_) {
    double ph = mode_dot(m, theta);
    s += c * Complex(std::cos(ph), std::sin(ph));
  }
  return s;
}

double ScalarFourier::eval(const Eigen::VectorXd& theta) const {
  Complex s = eval_complex(theta);
  return s.real();
}

ScalarFourier ScalarFourier::shifted(const Eigen::VectorXd& delta) const {
  ScalarFourier out(dim_);
  for (const auto& [m, c] : coeffs_) {
    double ph = mode_dot(m, delta);
    out.coeffs_[m] = c * Complex(std::cos(ph), std::sin(ph));
  }
  return out;
}

double ScalarFourier::norm_weighted(double r) const {
  double s = 0.0;
  for (const auto& [m, c] : coeffs_) s += std::abs(c) * std::exp(r * mode_l1(m));
  return s;
}

bool ScalarFourier::reality_ok(double tol) const {
  for (const auto& [m, c] : coeffs_) {
    auto it = coeffs_.find(negated(m));
    Complex mirror = it == coeffs_.end() ? Complex(0, 0) : it->second;
    if (std::abs(mirror - std::conj(c)) > tol * std::max(1.0, std::abs(c))) return false;
  }
  return true;
}

int ScalarFourier::max_mode() const {
  int s = 0;
  for (const auto& [m, c] : coeffs_) s = std::max(s, mode_linf(m));
  return s;
}

ScalarFourier& ScalarFourier::operator*=(double s) {
  for (auto& [m, c] : coeffs_) c *= s;
  return *this;
}

ScalarFourier ScalarFourier::cosine(double eps, int dim) {
  ScalarFourier v(dim);
  Eigen::VectorXi k = Eigen::VectorXi::Zero(dim);
  k[0] = 1;
  v.set_pair(k, Complex(eps, 0.0));
  return v;
}

ScalarFourier ScalarFourier::random_analytic(double eps, double r, int k_max,
                                             std::uint64_t seed, int dim) {
  ScalarFourier v(dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for_each_mode(dim, k_max, [&](const Eigen::VectorXi& k) {
    // fill each +-k pair once, keyed by the lexicographically positive member
    ModeIndex m = to_mode(k);
    if (m < negated(m)) return;
    double w = eps * std::exp(-r * mode_l1(m));
    Complex c(w * unif(rng), w * unif(rng));
    v.set_pair(k, c);
  });
  return v;
}

// ----- MatrixFourier -----

MatrixFourier::Mat MatrixFourier::coeff(const ModeIndex& m) const {
  auto it = coeffs_.find(m);
  return it == coeffs_.end() ? Mat::Zero() : it->second;
}

void MatrixFourier::add_coeff(const ModeIndex& m, const Mat& c) {
  auto it = coeffs_.find(m);
  if (it == coeffs_.end())
    coeffs_[m] = c;
  else
    it->second += c;
}

void MatrixFourier::set_coeff(const ModeIndex& m, const Mat& c) { coeffs_[m] = c; }

Eigen::Matrix2cd MatrixFourier::eval(const Eigen::VectorXd& theta) const {
  Mat s = Mat::Zero();
  double inv_q = 1.0 / denom_;
  for (const auto& [m, c] : coeffs_) {
    double ph = mode_dot(m, theta) * inv_q;
    s += c * Complex(std::cos(ph), std::sin(ph));
  }
  return s;
}

Eigen::Matrix2d MatrixFourier::eval_real(const Eigen::VectorXd& theta) const {
  return eval(theta).real();
}

MatrixFourier MatrixFourier::shifted(const Eigen::VectorXd& delta) const {
  MatrixFourier out(dim_, denom_);
  double inv_q = 1.0 / denom_;
  for (const auto& [m, c] : coeffs_) {
    double ph = mode_dot(m, delta) * inv_q;
    out.coeffs_[m] = c * Complex(std::cos(ph), std::sin(ph));
  }
  return out;
}

MatrixFourier MatrixFourier::promoted() const {
  if (denom_ == 2) return *this;
  MatrixFourier out(dim_, 2);
  for (const auto& [m, c] : coeffs_) {
    ModeIndex m2(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) m2[i] = 2 * m[i];
    out.coeffs_[m2] = c;
  }
  return out;
}

MatrixFourier MatrixFourier::adjoint_modes() const {
  MatrixFourier out(dim_, denom_);
  for (const auto& [m, c] : coeffs_) out.coeffs_[negated(m)] = c.conjugate();
  return out;
}

double MatrixFourier::norm_weighted(double r) const {
  double s = 0.0;
  for (const auto& [m, c] : coeffs_) s += c.norm() * std::exp(r * mode_l1(m) / denom_);
  return s;
}

double MatrixFourier::constant_drop_norm() const {
  double s = 0.0;
  for (const auto& [m, c] : coeffs_)
    if (mode_linf(m) > 0) s += c.norm();
  return s;
}

bool MatrixFourier::reality_ok(double tol) const {
  for (const auto& [m, c] : coeffs_) {
    auto it = coeffs_.find(negated(m));
    Mat mirror = it == coeffs_.end() ? Mat::Zero() : it->second;
    if ((mirror - c.conjugate()).norm() > tol * std::max(1.0, c.norm())) return false;
  }
  return true;
}

void MatrixFourier::enforce_reality() {
  std::map<ModeIndex, Mat> sym;
  for (const auto& [m, c] : coeffs_) {
    Mat mirror = coeff(negated(m));
    sym[m] = 0.5 * (c + mirror.conjugate());
  }
  coeffs_ = std::move(sym);
}

void MatrixFourier::compress(double tol) {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (it->second.norm() < tol)
      it = coeffs_.erase(it);
    else
      ++it;
  }
}

int MatrixFourier::max_mode() const {
  int s = 0;
  for (const auto& [m, c] : coeffs_) s = std::max(s, mode_linf(m));
  return s;
}

MatrixFourier& MatrixFourier::operator+=(const MatrixFourier& rhs) {
  if (denom_ != rhs.denom_) {
    if (denom_ == 1 && rhs.denom_ == 2) {
      *this = promoted();
    } else if (denom_ == 2 && rhs.denom_ == 1) {
      return *this += rhs.promoted();
    } else {
      throw std::invalid_argument("matrix series: incompatible denominators");
    }
  }
  for (const auto& [m, c] : rhs.coeffs_) add_coeff(m, c);
  return *this;
}

MatrixFourier& MatrixFourier::operator-=(const MatrixFourier& rhs) {
  MatrixFourier neg = rhs;
  neg *= -1.0;
  return *this += neg;
}

MatrixFourier& MatrixFourier::operator*=(double s) {
  for (auto& [m, c] : coeffs_) c *= s;
  return *this;
}

MatrixFourier operator*(const MatrixFourier& a, const MatrixFourier& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("matrix series: dim mismatch");
  if (a.denom_ != b.denom_) {
    if (a.denom_ == 1) return a.promoted() * b;
    return a * b.promoted();
  }
  MatrixFourier out(a.dim_, a.denom_);
  for (const auto& [ma, ca] : a.coeffs_) {
    for (const auto& [mb, cb] : b.coeffs_) {
      ModeIndex m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      out.add_coeff(m, ca * cb);
    }
  }
  return out;
}

MatrixFourier MatrixFourier::constant(const Eigen::Matrix2d& a, int dim, int denom) {
  return constant_c(a.cast<Complex>(), dim, denom);
}

MatrixFourier MatrixFourier::constant_c(const Mat& a, int dim, int denom) {
  MatrixFourier out(dim, denom);
  out.coeffs_[ModeIndex(dim, 0)] = a;
  return out;
}

MatrixFourier MatrixFourier::half_angle_rotation(const Eigen::VectorXi& k, int dim) {
  // R(phi) = cos(phi) I + sin(phi) J0 with phi = <k,theta>/2.
  MatrixFourier out(dim, 2);
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd j0;
  j0 << 0, -1, 1, 0;
  Complex half(0.5, 0.0), ihalf(0.0, 0.5);
  out.add_coeff(to_mode(k), half * id - ihalf * j0);
  out.add_coeff(to_mode(Eigen::VectorXi(-k)), half * id + ihalf * j0);
  return out;
}

Eigen::VectorXd orbit_samples(const ScalarFourier& v, const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& omega, long count) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(count);
  for (const auto& [m, coef] : v.coeffs()) {
    double ph0 = 0.0, dph = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      ph0 += m[i] * theta[static_cast<Eigen::Index>(i)];
      dph += m[i] * omega[static_cast<Eigen::Index>(i)];
    }
    Complex z(std::cos(ph0), std::sin(ph0));
    Complex step(std::cos(dph), std::sin(dph));
    for (long n = 0; n < count; ++n) {
      out[n] += (coef * z).real();
      z *= step;
      if ((n & 4095) == 4095) z /= std::abs(z);  // curb drift on long orbits
    }
  }
  return out;
}

MatrixFourier exp_series(const MatrixFourier& w, double tol, int max_order) {
  MatrixFourier out = MatrixFourier::constant(Eigen::Matrix2d::Identity(), w.dim(), w.denom());
  MatrixFourier term = w;
  for (int order = 1; order <= max_order; ++order) {
    out += term;
    if (term.norm_weighted(0.0) < tol) break;
    term = term * w;
    term *= 1.0 / (order + 1);
    term.compress(tol * 1e-3);
  }
  return out;
}

MatrixFourier neumann_inverse(const MatrixFourier& w, double tol, int max_order) {
  double n0 = w.norm_weighted(0.0);
  if (n0 >= 1.0) throw std::runtime_error("neumann inverse: series norm >= 1");
  MatrixFourier out = MatrixFourier::constant(Eigen::Matrix2d::Identity(), w.dim(), w.denom());
  MatrixFourier term = w;
  term *= -1.0;
  MatrixFourier power = term;
  for (int order = 1; order <= max_order; ++order) {
    out += power;
    if (power.norm_weighted(0.0) < tol) break;
    power = power * term;
    power.compress(tol * 1e-3);
  }
  return out;
}

}  // namespace qpdl
