#include "residua/testforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

namespace residua {

namespace {

Rational binomial(int n, int k) {
  if (k < 0 || k > n) return Rational(0);
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return Rational(b);
}

struct DoublePoly {
  std::vector<double> c;
  std::vector<double> dc;
  double eval(double x) const {
    double acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
  double eval_derivative(double x) const {
    double acc = 0;
    for (auto it = dc.rbegin(); it != dc.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
};

const DoublePoly& smoothstep_double(int s) {
  static std::mutex mu;
  static std::map<int, DoublePoly> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(s);
  if (it != cache.end()) return it->second;
  const Poly& p = smoothstep_poly(s);
  DoublePoly d;
  for (const auto& c : p.coeffs()) d.c.push_back(c.get_d());
  const Poly dp = p.derivative();
  for (const auto& c : dp.coeffs()) d.dc.push_back(c.get_d());
  return cache.emplace(s, std::move(d)).first->second;
}

// Antiderivative-based exact integral of p over [a, b].
Rational integrate(const Poly& p, const Rational& a, const Rational& b) {
  std::vector<Rational> anti(static_cast<size_t>(p.degree()) + 2, Rational(0));
  for (int i = 0; i <= p.degree(); ++i) anti[static_cast<size_t>(i) + 1] = p.coeff(i) / Rational(i + 1);
  Poly P(std::move(anti));
  return P.eval(b) - P.eval(a);
}

// 1 - S_s(2t - 1) as a polynomial in t.
Poly plateau_descent(int s) {
  Poly arg({Rational(-1), Rational(2)});
  return Poly::constant(1) - smoothstep_poly(s).compose(arg);
}

}  // namespace

RadialProfile RadialProfile::beta(int d) {
  if (d < 1) throw std::invalid_argument("Beta profile needs d >= 1");
  return {Kind::Beta, d};
}

RadialProfile RadialProfile::plateau(int s) {
  if (s < 0) throw std::invalid_argument("Plateau profile needs s >= 0");
  return {Kind::Plateau, s};
}

CutoffProfile CutoffProfile::smooth_step(int s) {
  if (s < 1) throw std::invalid_argument("SmoothStep needs s >= 1");
  return {Kind::SmoothStep, s};
}

CutoffProfile CutoffProfile::indicator() { return {Kind::Indicator, 0}; }

TestForm TestForm::monomial(int n, MultiIndex k, MultiIndex m, std::vector<int> M, int beta_d) {
  TestForm f;
  f.n = n;
  f.profiles.assign(static_cast<size_t>(n), RadialProfile::beta(beta_d));
  f.M = std::move(M);
  std::sort(f.M.begin(), f.M.end());
  f.add(std::move(k), std::move(m), Gaussian(1));
  f.validate();
  return f;
}

void TestForm::add(MultiIndex k, MultiIndex m, const Gaussian& c) {
  auto key = std::make_pair(std::move(k), std::move(m));
  auto it = coeff.find(key);
  if (it == coeff.end()) {
    if (!c.is_zero()) coeff.emplace(std::move(key), c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) coeff.erase(it);
}

void TestForm::validate() const {
  if (n < 1) throw DimensionMismatch("test form needs n >= 1");
  if (static_cast<int>(profiles.size()) != n) throw DimensionMismatch("one radial profile per variable required");
  for (size_t i = 0; i < M.size(); ++i) {
    if (M[i] < 0 || M[i] >= n) throw DimensionMismatch("antiholomorphic index out of range");
    if (i > 0 && M[i] <= M[i - 1]) throw std::invalid_argument("M must be strictly ascending");
  }
  for (const auto& [km, c] : coeff) {
    const auto& [k, m] = km;
    if (static_cast<int>(k.size()) != n || static_cast<int>(m.size()) != n) {
      throw DimensionMismatch("coefficient multi-index length differs from n");
    }
    for (int i = 0; i < n; ++i) {
      if (k[static_cast<size_t>(i)] < 0 || m[static_cast<size_t>(i)] < 0) {
        throw std::invalid_argument("negative coefficient exponent");
      }
    }
  }
}

int TestForm::angular_degree() const {
  int deg = 0;
  for (const auto& [km, c] : coeff) {
    for (int i = 0; i < n; ++i) {
      deg = std::max(deg, std::abs(km.first[static_cast<size_t>(i)] - km.second[static_cast<size_t>(i)]));
    }
  }
  return deg;
}

const Poly& smoothstep_poly(int s) {
  static std::mutex mu;
  static std::map<int, Poly> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(s);
  if (it != cache.end()) return it->second;
  // S_s(x) = x^{s+1} sum_{j=0}^{s} C(s+j, j) C(2s+1, s-j) (-x)^j
  Poly sum;
  for (int j = 0; j <= s; ++j) {
    Rational c = binomial(s + j, j) * binomial(2 * s + 1, s - j);
    if (j % 2 == 1) c = -c;
    sum = sum + Poly::monomial(c, j);
  }
  Poly p = sum * Poly::monomial(Rational(1), s + 1);
  return cache.emplace(s, std::move(p)).first->second;
}

Rational moment(const RadialProfile& rho, int m) {
  if (m < 0) throw std::invalid_argument("moment order must be nonnegative");
  if (rho.kind == RadialProfile::Kind::Beta) {
    return factorial(m) * factorial(rho.param) / factorial(m + rho.param + 1);
  }
  const Rational half(1, 2);
  Rational flat = rational_pow(half, m + 1) / Rational(m + 1);
  Poly tail = plateau_descent(rho.param) * Poly::monomial(Rational(1), m);
  return flat + integrate(tail, half, Rational(1));
}

UniRat beta_mellin_moment(int d, int K) {
  if (d < 0) throw std::invalid_argument("Beta order must be nonnegative");
  std::vector<Rational> shifts;
  for (int r = 0; r <= d; ++r) shifts.emplace_back(K + 1 + r);
  return UniRat(Poly::constant(factorial(d)), std::move(shifts));
}

double profile_eval(const RadialProfile& rho, double t) {
  if (t < 0) throw std::invalid_argument("profile evaluated at negative t");
  if (t >= 1.0) return 0.0;
  if (rho.kind == RadialProfile::Kind::Beta) return std::pow(1.0 - t, rho.param);
  if (t <= 0.5) return 1.0;
  return 1.0 - smoothstep_double(rho.param).eval(2.0 * t - 1.0);
}

Rational profile_eval(const RadialProfile& rho, const Rational& t) {
  if (sgn(t) < 0) throw std::invalid_argument("profile evaluated at negative t");
  if (t >= 1) return Rational(0);
  if (rho.kind == RadialProfile::Kind::Beta) return rational_pow(Rational(1) - t, rho.param);
  if (t <= Rational(1, 2)) return Rational(1);
  return plateau_descent(rho.param).eval(t);
}

double cutoff_eval(const CutoffProfile& chi, double t, int deriv) {
  if (t < 0) throw std::invalid_argument("cutoff evaluated at negative t");
  if (chi.kind == CutoffProfile::Kind::Indicator) {
    if (deriv != 0) throw DerivativeOfIndicator("the indicator cutoff has no pointwise derivative");
    return t >= 1.0 ? 1.0 : 0.0;
  }
  if (deriv == 0) {
    if (t <= 0.5) return 0.0;
    if (t >= 1.0) return 1.0;
    return smoothstep_double(chi.s).eval(2.0 * t - 1.0);
  }
  if (deriv != 1) throw std::invalid_argument("only deriv 0 or 1 supported");
  if (t <= 0.5 || t >= 1.0) return 0.0;
  return 2.0 * smoothstep_double(chi.s).eval_derivative(2.0 * t - 1.0);
}

}  // namespace residua
