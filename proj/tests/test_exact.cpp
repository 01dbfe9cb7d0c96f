#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "residua/exact.hpp"

using namespace residua;

TEST_CASE("scalar arithmetic tracks powers of 2 pi i") {
  ExactScalar a(Gaussian(1), 1);
  CHECK(a * a == ExactScalar(Gaussian(1), 2));

  auto half = ExactScalar(Gaussian(Rational(1, 2)));
  auto sum = half + half;
  REQUIRE(sum.as_scalar());
  CHECK(*sum.as_scalar() == ExactScalar(1));

  auto zero = ExactScalar(0) * ExactScalar(Gaussian(3), 2);
  CHECK(zero.s() == 0);
  CHECK(zero.is_zero());

  ScalarSum mixed = ExactScalar(1) + ExactScalar(Gaussian(1), 1);
  CHECK_FALSE(mixed.as_scalar());
  CHECK(mixed.parts().size() == 2);
}

TEST_CASE("scalar string form round-trips") {
  ExactScalar x(Gaussian(Rational(-3, 4), Rational(5, 7)), 2);
  CHECK(to_string(x) == "(-3/4 + 5/7 i) * (2*pi*i)^2");
  CHECK(parse_scalar(to_string(x)) == x);
  for (int trial = 0; trial < 50; ++trial) {
    ExactScalar y(gen::gaussian(), gen::uniform(0, 4));
    CHECK(parse_scalar(to_string(y)) == y);
  }
}

TEST_CASE("scalar numeric value uses (2 pi i)^s") {
  auto v = ExactScalar::two_pi_i_power(2).to_complex();
  CHECK(std::abs(static_cast<double>(v.real()) + 4 * M_PI * M_PI) < 1e-12);
  CHECK(std::abs(static_cast<double>(v.imag())) < 1e-12);
}

TEST_CASE("unirat limit at zero") {
  UniRat cancel(Poly::monomial(1, 1), {Rational(0), Rational(1)});
  auto l = unirat_limit_at_zero(cancel);
  CHECK(l.order == 0);
  CHECK(l.leading == 1);

  UniRat vanish(Poly::monomial(1, 2), {Rational(2)});
  l = unirat_limit_at_zero(vanish);
  CHECK(l.order == 2);
  CHECK(l.leading == Rational(1, 2));

  UniRat pole(Poly::constant(1), {Rational(0)});
  l = unirat_limit_at_zero(pole);
  CHECK(l.order == -1);
  CHECK(l.leading == 1);
}

namespace {

UniRat random_unirat() {
  std::vector<Rational> num;
  int deg = gen::uniform(0, 3);
  for (int i = 0; i <= deg; ++i) num.push_back(gen::rational());
  std::vector<Rational> shifts;
  int den = gen::uniform(0, 3);
  for (int i = 0; i < den; ++i) shifts.emplace_back(gen::uniform(-3, 3));
  return UniRat(Poly(num), shifts);
}

}  // namespace

TEST_CASE("normalized product evaluates as the product of evaluations") {
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    UniRat a = random_unirat();
    UniRat b = random_unirat();
    UniRat ab = a * b;
    for (int p = 0; p < 10; ++p) {
      Rational x = gen::rational(13) + Rational(1, 17);
      auto va = a.eval(x);
      auto vb = b.eval(x);
      auto vab = ab.eval(x);
      if (!va || !vb) continue;
      REQUIRE(vab);
      CHECK(*vab == *va * *vb);
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("order-0 limits agree with evaluation near zero") {
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    UniRat r = random_unirat();
    auto l = unirat_limit_at_zero(r);
    if (r.is_zero() || l.order != 0) continue;
    Rational prev_err;
    for (int k = 3; k <= 6; ++k) {
      Rational x = rational_pow(Rational(1, 10), k);
      auto v = r.eval(x);
      REQUIRE(v);
      Rational err = abs(*v - l.leading);
      if (k > 3) CHECK(err <= prev_err);
      prev_err = err;
    }
    CHECK(abs(prev_err) < Rational(1, 1000));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("laurent expansion reproduces the rational function") {
  for (int trial = 0; trial < 50; ++trial) {
    UniRat r = random_unirat();
    if (r.is_zero()) continue;
    auto series = r.laurent_at_zero(12);
    Rational x(1, 1000);
    auto exact = r.eval(x);
    REQUIRE(exact);
    Rational approx = 0;
    for (size_t i = 0; i < series.coef.size(); ++i) {
      approx += series.coef[i] * rational_pow(x, series.val + static_cast<int>(i));
    }
    CHECK(abs(approx - *exact) < rational_pow(Rational(1, 1000), 9));
  }
}

TEST_CASE("polynomial division by a linear factor") {
  Poly p = Poly::linear(2) * Poly::linear(-3) * Poly::linear(Rational(1, 2));
  Poly q = p.divide_linear(2);
  CHECK(q == Poly::linear(-3) * Poly::linear(Rational(1, 2)));
  CHECK_THROWS(Poly::linear(1).divide_linear(2));
}

TEST_CASE("affine form substitutions") {
  AffineForm f({1, 2}, 0);
  CHECK(to_string(f) == "λ1+2λ2");
  Poly p = f.substitute_powers({3, 1});
  CHECK(p == Poly::monomial(1, 3) + Poly::monomial(2, 1));
  Poly line = f.substitute_line({Rational(2), Rational(-1)}, {Rational(1), Rational(1)});
  CHECK(line == Poly::monomial(3, 1));
}

TEST_CASE("permutation sign by inversion count") {
  CHECK(permutation_sign({0, 1, 2}) == 1);
  CHECK(permutation_sign({1, 0, 2}) == -1);
  CHECK(permutation_sign({2, 0, 1}) == 1);
}
