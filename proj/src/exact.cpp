#include "residua/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace residua {

namespace {

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\n') out.push_back(c);
  }
  return out;
}

std::complex<long double> two_pi_i_pow(int s) {
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double mag = 1.0L;
  for (int k = 0; k < s; ++k) mag *= two_pi;
  switch (s % 4) {
    case 0: return {mag, 0.0L};
    case 1: return {0.0L, mag};
    case 2: return {-mag, 0.0L};
    default: return {0.0L, -mag};
  }
}

long double to_ld(const Rational& r) {
  return static_cast<long double>(r.get_d());
}

}  // namespace

Rational make_rational(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& r) { return r.get_str(); }

Rational parse_rational(const std::string& text) {
  std::string s = strip_spaces(text);
  if (s.empty()) throw ParseError("empty rational");
  if (s.front() == '+') s.erase(0, 1);
  Rational r;
  if (r.set_str(s, 10) != 0 || s.find_first_not_of("-0123456789/") != std::string::npos) {
    throw ParseError("not a rational: '" + text + "'");
  }
  if (s.find('/') != std::string::npos && sgn(r.get_den()) == 0) throw ParseError("zero denominator: '" + text + "'");
  r.canonicalize();
  return r;
}

Rational rational_pow(const Rational& base, int exponent) {
  Rational out(1);
  Rational b = exponent >= 0 ? base : Rational(1) / base;
  for (int k = 0; k < std::abs(exponent); ++k) out *= b;
  return out;
}

Rational factorial(int n) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
  return Rational(f);
}

// ---------------------------------------------------------------- Gaussian

Gaussian operator/(const Gaussian& a, const Gaussian& b) {
  Rational den = b.re * b.re + b.im * b.im;
  if (sgn(den) == 0) throw std::domain_error("division by zero Gaussian rational");
  Gaussian num = a * b.conj();
  return {num.re / den, num.im / den};
}

std::complex<long double> Gaussian::to_complex() const { return {to_ld(re), to_ld(im)}; }

std::string to_string(const Gaussian& g) { return to_string(g.re) + " + " + to_string(g.im) + " i"; }

Gaussian parse_gaussian(const std::string& text) {
  std::string s = strip_spaces(text);
  if (s.empty()) throw ParseError("empty Gaussian rational");
  if (s.back() != 'i') return Gaussian(parse_rational(s));
  s.pop_back();
  size_t plus = s.rfind('+');
  if (plus == std::string::npos || plus == 0) {
    // Pure imaginary, e.g. "3/2i" or "-i".
    if (s.empty() || s == "+") return {Rational(0), Rational(1)};
    if (s == "-") return {Rational(0), Rational(-1)};
    return {Rational(0), parse_rational(s)};
  }
  std::string im = s.substr(plus + 1);
  if (im.empty()) im = "1";
  if (im == "-") im = "-1";
  return {parse_rational(s.substr(0, plus)), parse_rational(im)};
}

// ------------------------------------------------------------ ExactScalar

ExactScalar::ExactScalar(Gaussian g, int s) : g_(std::move(g)), s_(s) {
  if (s_ < 0) throw std::invalid_argument("negative power of 2*pi*i");
  if (g_.is_zero()) s_ = 0;
}

std::complex<long double> ExactScalar::to_complex() const { return g_.to_complex() * two_pi_i_pow(s_); }

std::string to_string(const ExactScalar& x) {
  return "(" + to_string(x.g()) + ") * (2*pi*i)^" + std::to_string(x.s());
}

ExactScalar parse_scalar(const std::string& text) {
  std::string s = strip_spaces(text);
  const std::string marker = "*(2*pi*i)^";
  size_t pos = s.find(marker);
  if (pos == std::string::npos) return ExactScalar(parse_gaussian(s));
  std::string g = s.substr(0, pos);
  if (g.size() >= 2 && g.front() == '(' && g.back() == ')') g = g.substr(1, g.size() - 2);
  int power = 0;
  try {
    power = std::stoi(s.substr(pos + marker.size()));
  } catch (const std::exception&) {
    throw ParseError("bad power of 2*pi*i in '" + text + "'");
  }
  return {parse_gaussian(g), power};
}

std::optional<ExactScalar> try_add(const ExactScalar& a, const ExactScalar& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.s() != b.s()) return std::nullopt;
  return ExactScalar(a.g() + b.g(), a.s());
}

ScalarSum operator+(const ExactScalar& a, const ExactScalar& b) {
  ScalarSum out(a);
  out += b;
  return out;
}

// -------------------------------------------------------------- ScalarSum

ScalarSum::ScalarSum(const ExactScalar& x) { *this += x; }

ScalarSum& ScalarSum::operator+=(const ExactScalar& x) {
  if (x.is_zero()) return *this;
  auto it = parts_.find(x.s());
  if (it == parts_.end()) {
    parts_.emplace(x.s(), x.g());
  } else {
    it->second += x.g();
    if (it->second.is_zero()) parts_.erase(it);
  }
  return *this;
}

ScalarSum& ScalarSum::operator+=(const ScalarSum& other) {
  for (const auto& [s, g] : other.parts_) *this += ExactScalar(g, s);
  return *this;
}

ScalarSum operator*(const ScalarSum& a, const ExactScalar& b) {
  ScalarSum out;
  for (const auto& [s, g] : a.parts_) out += ExactScalar(g, s) * b;
  return out;
}

std::optional<ExactScalar> ScalarSum::as_scalar() const {
  if (parts_.empty()) return ExactScalar();
  if (parts_.size() != 1) return std::nullopt;
  return ExactScalar(parts_.begin()->second, parts_.begin()->first);
}

std::complex<long double> ScalarSum::to_complex() const {
  std::complex<long double> out = 0;
  for (const auto& [s, g] : parts_) out += ExactScalar(g, s).to_complex();
  return out;
}

std::string to_string(const ScalarSum& x) {
  if (x.parts().empty()) return to_string(ExactScalar());
  std::string out;
  for (const auto& [s, g] : x.parts()) {
    if (!out.empty()) out += " + ";
    out += to_string(ExactScalar(g, s));
  }
  return out;
}

// ------------------------------------------------------------------- Poly

Poly::Poly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

Poly Poly::constant(const Rational& c) { return Poly({c}); }

Poly Poly::monomial(const Rational& c, int degree) {
  std::vector<Rational> v(static_cast<size_t>(degree) + 1, Rational(0));
  v.back() = c;
  return Poly(std::move(v));
}

Poly Poly::linear(const Rational& c) { return Poly({c, Rational(1)}); }

void Poly::trim() {
  while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
}

Rational Poly::coeff(int i) const {
  if (i < 0 || i >= static_cast<int>(c_.size())) return Rational(0);
  return c_[static_cast<size_t>(i)];
}

int Poly::valuation() const {
  for (size_t i = 0; i < c_.size(); ++i) {
    if (sgn(c_[i]) != 0) return static_cast<int>(i);
  }
  return -1;
}

Rational Poly::eval(const Rational& x) const {
  Rational acc(0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<Rational> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<long>(i);
  return Poly(std::move(d));
}

Poly Poly::compose(const Poly& q) const {
  Poly acc;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + Poly::constant(*it);
  return acc;
}

Poly Poly::divide_linear(const Rational& c) const {
  if (c_.empty()) return {};
  // Synthetic division by (X + c): q_{n-1} = a_n, q_{k-1} = a_k - c q_k.
  const size_t n = c_.size() - 1;
  std::vector<Rational> q(n);
  Rational prev = c_[n];
  for (size_t k = n; k >= 1; --k) {
    if (k < n) prev = c_[k] - c * prev;
    q[k - 1] = prev;
  }
  Rational remainder = n == 0 ? c_[0] : c_[0] - c * q[0];
  if (sgn(remainder) != 0) throw std::logic_error("divide_linear: not a root");
  return Poly(std::move(q));
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()), Rational(0));
  for (size_t i = 0; i < a.c_.size(); ++i) v[i] += a.c_[i];
  for (size_t i = 0; i < b.c_.size(); ++i) v[i] += b.c_[i];
  return Poly(std::move(v));
}

Poly operator-(const Poly& a, const Poly& b) { return a + b * Rational(-1); }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> v(a.c_.size() + b.c_.size() - 1, Rational(0));
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (sgn(a.c_[i]) == 0) continue;
    for (size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
  }
  return Poly(std::move(v));
}

Poly operator*(const Poly& a, const Rational& b) {
  std::vector<Rational> v(a.c_);
  for (auto& x : v) x *= b;
  return Poly(std::move(v));
}

std::string to_string(const Poly& p, const std::string& var) {
  if (p.is_zero()) return "0";
  std::string out;
  for (int i = p.degree(); i >= 0; --i) {
    Rational c = p.coeff(i);
    if (sgn(c) == 0) continue;
    std::string cs = to_string(c);
    if (!out.empty()) out += sgn(c) > 0 ? "+" : "";
    if (i == 0) {
      out += cs;
    } else {
      if (c == 1) {
      } else if (c == -1) {
        out += "-";
      } else {
        out += cs + "*";
      }
      out += var;
      if (i > 1) out += "^" + std::to_string(i);
    }
  }
  return out;
}

// ---------------------------------------------------------- LaurentSeries

std::optional<int> LaurentSeries::order() const {
  for (size_t i = 0; i < coef.size(); ++i) {
    if (sgn(coef[i]) != 0) return val + static_cast<int>(i);
  }
  return std::nullopt;
}

Rational LaurentSeries::at(int ord) const {
  if (ord >= precision()) throw std::out_of_range("Laurent coefficient beyond known precision");
  if (ord < val) return Rational(0);
  return coef[static_cast<size_t>(ord - val)];
}

void LaurentSeries::strip() {
  size_t k = 0;
  while (k < coef.size() && sgn(coef[k]) == 0) ++k;
  coef.erase(coef.begin(), coef.begin() + static_cast<long>(k));
  val += static_cast<int>(k);
}

LaurentSeries LaurentSeries::from_poly(const Poly& p, int prec) {
  LaurentSeries s;
  s.val = 0;
  for (int i = 0; i < prec; ++i) s.coef.push_back(p.coeff(i));
  return s;
}

LaurentSeries LaurentSeries::inverse(int relative_terms) const {
  LaurentSeries a = *this;
  a.strip();
  if (a.coef.empty()) throw std::domain_error("inverse of a series with no known nonzero coefficient");
  const int terms = std::min<int>(relative_terms, static_cast<int>(a.coef.size()));
  LaurentSeries b;
  b.val = -a.val;
  b.coef.resize(static_cast<size_t>(std::max(terms, 0)));
  if (terms <= 0) return b;
  Rational inv0 = Rational(1) / a.coef[0];
  b.coef[0] = inv0;
  for (int k = 1; k < terms; ++k) {
    Rational acc(0);
    for (int j = 1; j <= k; ++j) acc += a.coef[static_cast<size_t>(j)] * b.coef[static_cast<size_t>(k - j)];
    b.coef[static_cast<size_t>(k)] = -acc * inv0;
  }
  return b;
}

LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
  LaurentSeries out;
  out.val = a.val + b.val;
  const size_t len = std::min(a.coef.size(), b.coef.size());
  out.coef.assign(len, Rational(0));
  for (size_t i = 0; i < len; ++i) {
    if (sgn(a.coef[i]) == 0) continue;
    for (size_t j = 0; i + j < len; ++j) out.coef[i + j] += a.coef[i] * b.coef[j];
  }
  return out;
}

LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
  LaurentSeries out;
  out.val = std::min(a.val, b.val);
  const int prec = std::min(a.precision(), b.precision());
  for (int o = out.val; o < prec; ++o) out.coef.push_back(a.at(o) + b.at(o));
  return out;
}

// ----------------------------------------------------------------- UniRat

UniRat::UniRat(Poly numerator, std::vector<Rational> shifts) : num_(std::move(numerator)), shifts_(std::move(shifts)) {
  normalize();
}

UniRat UniRat::constant(const Rational& c) { return UniRat(Poly::constant(c), {}); }

void UniRat::normalize() {
  if (num_.is_zero()) {
    shifts_.clear();
    return;
  }
  std::vector<Rational> kept;
  for (const auto& c : shifts_) {
    if (num_.degree() >= 1 && sgn(num_.eval(-c)) == 0) {
      num_ = num_.divide_linear(c);
    } else {
      kept.push_back(c);
    }
  }
  std::sort(kept.begin(), kept.end());
  shifts_ = std::move(kept);
}

Poly UniRat::denominator() const {
  Poly d = Poly::constant(1);
  for (const auto& c : shifts_) d = d * Poly::linear(c);
  return d;
}

std::optional<Rational> UniRat::eval(const Rational& x) const {
  Rational den(1);
  for (const auto& c : shifts_) den *= (x + c);
  if (sgn(den) == 0) return std::nullopt;
  return num_.eval(x) / den;
}

UniRat UniRat::derivative() const {
  Poly d = denominator();
  Poly num = num_.derivative() * d - num_ * d.derivative();
  std::vector<Rational> sh = shifts_;
  sh.insert(sh.end(), shifts_.begin(), shifts_.end());
  return UniRat(std::move(num), std::move(sh));
}

UniRat UniRat::shifted(const Rational& a) const {
  std::vector<Rational> sh = shifts_;
  for (auto& c : sh) c += a;
  return UniRat(num_.compose(Poly::linear(a)), std::move(sh));
}

UniRat operator*(const UniRat& a, const UniRat& b) {
  std::vector<Rational> sh = a.shifts_;
  sh.insert(sh.end(), b.shifts_.begin(), b.shifts_.end());
  return UniRat(a.num_ * b.num_, std::move(sh));
}

LaurentSeries UniRat::laurent_at_zero(int terms) const {
  if (num_.is_zero()) return LaurentSeries{0, {}};
  int zeros = 0;
  std::vector<Rational> others;
  for (const auto& c : shifts_) {
    if (sgn(c) == 0) {
      ++zeros;
    } else {
      others.push_back(c);
    }
  }
  const int vn = num_.valuation();
  const int prec = vn + terms;
  LaurentSeries s = LaurentSeries::from_poly(num_, prec);
  for (const auto& c : others) {
    LaurentSeries inv;
    inv.val = 0;
    Rational ci = Rational(1) / c;
    Rational term = ci;
    for (int k = 0; k < prec; ++k) {
      inv.coef.push_back(term);
      term *= -ci;
    }
    s = s * inv;
  }
  s.val -= zeros;
  s.strip();
  return s;
}

LaurentSeries UniRat::compose_series(const Poly& p, int precision) const {
  Poly npt = num_.compose(p);
  if (npt.is_zero()) return LaurentSeries{precision, {}};
  int total = npt.valuation();
  std::vector<Poly> dens;
  for (const auto& c : shifts_) {
    Poly q = p + Poly::constant(c);
    if (q.is_zero()) throw std::domain_error("rational factor composed onto its own pole");
    total -= q.valuation();
    dens.push_back(std::move(q));
  }
  const int rel = precision - total;
  if (rel <= 0) return LaurentSeries{precision, {}};
  LaurentSeries out = LaurentSeries::from_poly(npt, npt.valuation() + rel);
  out.strip();
  for (const auto& q : dens) {
    LaurentSeries qs = LaurentSeries::from_poly(q, q.valuation() + rel);
    out = out * qs.inverse(rel);
  }
  return out;
}

int UniRat::composed_order(const Poly& p) const {
  Poly npt = num_.compose(p);
  if (npt.is_zero()) return std::numeric_limits<int>::max();
  int total = npt.valuation();
  for (const auto& c : shifts_) {
    Poly q = p + Poly::constant(c);
    if (q.is_zero()) throw std::domain_error("rational factor composed onto its own pole");
    total -= q.valuation();
  }
  return total;
}

LimitAtZero unirat_limit_at_zero(const UniRat& r) {
  if (r.is_zero()) return {std::numeric_limits<int>::max(), Rational(0)};
  LaurentSeries s = r.laurent_at_zero(1);
  return {s.val, s.coef.at(0)};
}

std::string to_string(const UniRat& r, const std::string& var) {
  std::string out = "(" + to_string(r.numerator(), var) + ")";
  if (r.shifts().empty()) return out;
  out += "/(";
  bool first = true;
  for (const auto& c : r.shifts()) {
    if (!first) out += "*";
    first = false;
    if (sgn(c) == 0) {
      out += var;
    } else {
      out += "(" + var + (sgn(c) > 0 ? "+" : "") + to_string(c) + ")";
    }
  }
  return out + ")";
}

// ------------------------------------------------------------ AffineForm

bool AffineForm::is_constant() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](long c) { return c == 0; });
}

Rational AffineForm::eval(const std::vector<Rational>& lambda) const {
  if (lambda.size() != coeffs.size()) throw DimensionMismatch("affine form evaluated at wrong dimension");
  Rational acc(constant);
  for (size_t j = 0; j < coeffs.size(); ++j) acc += Rational(coeffs[j]) * lambda[j];
  return acc;
}

Poly AffineForm::substitute_powers(const std::vector<int>& exponents) const {
  if (exponents.size() != coeffs.size()) throw DimensionMismatch("exponent vector length");
  Poly p = Poly::constant(Rational(constant));
  for (size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != 0) p = p + Poly::monomial(Rational(coeffs[j]), exponents[j]);
  }
  return p;
}

Poly AffineForm::substitute_line(const std::vector<Rational>& base, const std::vector<Rational>& direction) const {
  Rational b = eval(base);
  Rational d(0);
  for (size_t j = 0; j < coeffs.size(); ++j) d += Rational(coeffs[j]) * direction.at(j);
  return Poly({b, d});
}

std::string to_string(const AffineForm& f, const std::string& var) {
  std::string out;
  for (size_t j = 0; j < f.coeffs.size(); ++j) {
    long c = f.coeffs[j];
    if (c == 0) continue;
    if (c < 0) {
      out += "-";
    } else if (!out.empty()) {
      out += "+";
    }
    if (std::abs(c) != 1) out += std::to_string(std::abs(c));
    out += var + std::to_string(j + 1);
  }
  if (f.constant != 0 || out.empty()) {
    if (f.constant >= 0 && !out.empty()) out += "+";
    out += std::to_string(f.constant);
  }
  return out;
}

int permutation_sign(std::vector<int> keys) {
  int inversions = 0;
  for (size_t i = 0; i < keys.size(); ++i) {
    for (size_t j = i + 1; j < keys.size(); ++j) {
      if (keys[i] == keys[j]) throw std::invalid_argument("permutation_sign: repeated key");
      if (keys[i] > keys[j]) ++inversions;
    }
  }
  return inversions % 2 == 0 ? 1 : -1;
}

}  // namespace residua
