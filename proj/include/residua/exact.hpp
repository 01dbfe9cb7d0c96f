#pragma once

// Exact arithmetic substrate: rationals, Gaussian rationals, scalars carrying
// powers of 2*pi*i, univariate rational functions with factored linear
// denominators, integer affine forms in the lambda parameters, and truncated
// Laurent series with rational coefficients.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "residua/errors.hpp"

namespace residua {

using Rational = mpq_class;

Rational make_rational(long num, long den = 1);
std::string to_string(const Rational& r);
Rational parse_rational(const std::string& text);
Rational rational_pow(const Rational& base, int exponent);
Rational factorial(int n);

/// Gaussian rational re + im*i.
struct Gaussian {
  Rational re;
  Rational im;

  Gaussian() = default;
  Gaussian(Rational r) : re(std::move(r)), im(0) {}  // NOLINT(google-explicit-constructor)
  Gaussian(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  Gaussian(long r) : re(r), im(0) {}  // NOLINT(google-explicit-constructor)

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  Gaussian conj() const { return {re, -im}; }
  std::complex<long double> to_complex() const;

  friend Gaussian operator+(const Gaussian& a, const Gaussian& b) { return {a.re + b.re, a.im + b.im}; }
  friend Gaussian operator-(const Gaussian& a, const Gaussian& b) { return {a.re - b.re, a.im - b.im}; }
  friend Gaussian operator-(const Gaussian& a) { return {-a.re, -a.im}; }
  friend Gaussian operator*(const Gaussian& a, const Gaussian& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Gaussian operator/(const Gaussian& a, const Gaussian& b);
  friend bool operator==(const Gaussian& a, const Gaussian& b) { return a.re == b.re && a.im == b.im; }
  Gaussian& operator+=(const Gaussian& b) { return *this = *this + b; }
  Gaussian& operator*=(const Gaussian& b) { return *this = *this * b; }
};

std::string to_string(const Gaussian& g);
Gaussian parse_gaussian(const std::string& text);

/// g * (2*pi*i)^s with s >= 0. Zero is always stored with s = 0.
class ExactScalar {
 public:
  ExactScalar() = default;
  ExactScalar(Gaussian g, int s = 0);  // NOLINT(google-explicit-constructor)
  ExactScalar(long v) : ExactScalar(Gaussian(v)) {}  // NOLINT(google-explicit-constructor)

  static ExactScalar two_pi_i_power(int s) { return {Gaussian(1), s}; }

  const Gaussian& g() const { return g_; }
  int s() const { return s_; }
  bool is_zero() const { return g_.is_zero(); }
  std::complex<long double> to_complex() const;

  friend ExactScalar operator*(const ExactScalar& a, const ExactScalar& b) {
    return {a.g_ * b.g_, a.s_ + b.s_};
  }
  friend ExactScalar operator-(const ExactScalar& a) { return {-a.g_, a.s_}; }
  friend bool operator==(const ExactScalar& a, const ExactScalar& b) { return a.s_ == b.s_ && a.g_ == b.g_; }

 private:
  Gaussian g_;
  int s_ = 0;
};

std::string to_string(const ExactScalar& x);
ExactScalar parse_scalar(const std::string& text);

/// Sum of scalars with possibly different powers of 2*pi*i.
class ScalarSum {
 public:
  ScalarSum() = default;
  ScalarSum(const ExactScalar& x);  // NOLINT(google-explicit-constructor)

  ScalarSum& operator+=(const ExactScalar& x);
  ScalarSum& operator+=(const ScalarSum& other);
  friend ScalarSum operator+(ScalarSum a, const ScalarSum& b) { return a += b; }
  friend ScalarSum operator*(const ScalarSum& a, const ExactScalar& b);
  friend bool operator==(const ScalarSum& a, const ScalarSum& b) { return a.parts_ == b.parts_; }

  bool is_zero() const { return parts_.empty(); }
  /// The single (g, s) pair, or nullopt for mixed sums. Zero maps to (0, 0).
  std::optional<ExactScalar> as_scalar() const;
  const std::map<int, Gaussian>& parts() const { return parts_; }
  std::complex<long double> to_complex() const;

 private:
  std::map<int, Gaussian> parts_;
};

std::string to_string(const ScalarSum& x);

/// Addition of two scalars: equal powers (or a zero operand) stay scalar.
std::optional<ExactScalar> try_add(const ExactScalar& a, const ExactScalar& b);
ScalarSum operator+(const ExactScalar& a, const ExactScalar& b);

/// Dense univariate polynomial with rational coefficients; coeffs()[i] is the X^i coefficient.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coeffs);
  static Poly constant(const Rational& c);
  static Poly monomial(const Rational& c, int degree);
  /// X + c
  static Poly linear(const Rational& c);

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coeffs() const { return c_; }
  Rational coeff(int i) const;
  /// Index of the lowest nonzero coefficient; -1 for the zero polynomial.
  int valuation() const;

  Rational eval(const Rational& x) const;
  Poly derivative() const;
  /// p(q(X))
  Poly compose(const Poly& q) const;
  /// Exact division by (X + c); requires p(-c) == 0.
  Poly divide_linear(const Rational& c) const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Rational& b);
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  void trim();
  std::vector<Rational> c_;
};

std::string to_string(const Poly& p, const std::string& var = "X");

/// Truncated Laurent series sum_{i} coef[i] t^{val + i}, exact for orders < val + coef.size().
struct LaurentSeries {
  int val = 0;
  std::vector<Rational> coef;

  int precision() const { return val + static_cast<int>(coef.size()); }
  /// Order of the first nonzero known coefficient, or nullopt if all known coefficients vanish.
  std::optional<int> order() const;
  Rational at(int order) const;
  void strip();

  static LaurentSeries from_poly(const Poly& p, int precision);
  LaurentSeries inverse(int relative_terms) const;
  friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b);
  friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b);
};

/// numerator / prod_r (X + shifts[r]). Normalized: no shift is a root of the numerator,
/// shifts sorted, zero function has no shifts.
class UniRat {
 public:
  UniRat() = default;
  UniRat(Poly numerator, std::vector<Rational> shifts);
  static UniRat constant(const Rational& c);

  const Poly& numerator() const { return num_; }
  const std::vector<Rational>& shifts() const { return shifts_; }
  Poly denominator() const;
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return shifts_.empty() && num_.degree() <= 0; }

  std::optional<Rational> eval(const Rational& x) const;
  UniRat derivative() const;
  /// r(X + a)
  UniRat shifted(const Rational& a) const;
  /// Laurent expansion at X = 0 with `terms` coefficients from the leading order.
  LaurentSeries laurent_at_zero(int terms) const;
  /// Laurent series of r(p(t)) in t, exact for orders < precision.
  LaurentSeries compose_series(const Poly& p, int precision) const;
  /// Order of r(p(t)) at t = 0.
  int composed_order(const Poly& p) const;

  friend UniRat operator*(const UniRat& a, const UniRat& b);
  friend bool operator==(const UniRat& a, const UniRat& b) {
    return a.num_ == b.num_ && a.shifts_ == b.shifts_;
  }

 private:
  void normalize();
  Poly num_;
  std::vector<Rational> shifts_;
};

/// Order of vanishing at 0 (negative = pole order) and the leading Laurent coefficient.
struct LimitAtZero {
  int order = 0;
  Rational leading;
};
LimitAtZero unirat_limit_at_zero(const UniRat& r);

std::string to_string(const UniRat& r, const std::string& var = "X");

/// sum_j coeffs[j] * lambda_j + constant with integer coefficients.
struct AffineForm {
  std::vector<long> coeffs;
  long constant = 0;

  AffineForm() = default;
  AffineForm(std::vector<long> c, long k = 0) : coeffs(std::move(c)), constant(k) {}
  static AffineForm zero(int q) { return AffineForm(std::vector<long>(static_cast<size_t>(q), 0)); }

  int vars() const { return static_cast<int>(coeffs.size()); }
  bool is_constant() const;
  Rational eval(const std::vector<Rational>& lambda) const;
  /// Polynomial in t obtained by substituting lambda_j = t^{exponents[j]}.
  Poly substitute_powers(const std::vector<int>& exponents) const;
  /// Polynomial in t obtained by substituting lambda = base + t * direction.
  Poly substitute_line(const std::vector<Rational>& base, const std::vector<Rational>& direction) const;

  friend bool operator==(const AffineForm& a, const AffineForm& b) {
    return a.coeffs == b.coeffs && a.constant == b.constant;
  }
  friend bool operator<(const AffineForm& a, const AffineForm& b) {
    return std::tie(a.coeffs, a.constant) < std::tie(b.coeffs, b.constant);
  }
};

/// Renders e.g. "l1+l2" using `var` as the variable stem ("lambda" gives "λ").
std::string to_string(const AffineForm& f, const std::string& var = "λ");

/// Sign of the permutation sorting `keys` ascending (keys must be distinct).
int permutation_sign(std::vector<int> keys);

}  // namespace residua
