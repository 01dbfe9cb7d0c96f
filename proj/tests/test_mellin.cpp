#include <doctest.h>

#include "gen.hpp"
#include "residua/catalog.hpp"
#include "residua/mellin.hpp"

using namespace residua;

namespace {

const ProductStep RES_Z = ProductStep::res({1, 0});
const ProductStep RES_W = ProductStep::res({0, 1});
const ProductStep RES_ZW = ProductStep::res({1, 1});

ScalarSum tpi(const Rational& c, int s) { return ScalarSum(ExactScalar(Gaussian(c), s)); }

TestForm rho_rho(int d = 1) { return TestForm::monomial(2, {0, 0}, {0, 0}, {}, d); }
TestForm z_rho_rho(int d = 1) { return TestForm::monomial(2, {1, 0}, {0, 0}, {}, d); }

ScalarSum value(const LimitResult& r) {
  REQUIRE(std::holds_alternative<ScalarSum>(r));
  return std::get<ScalarSum>(r);
}

ScalarSum value(const PointValue& r) {
  REQUIRE(std::holds_alternative<ScalarSum>(r));
  return std::get<ScalarSum>(r);
}

std::vector<Rational> point(std::initializer_list<Rational> xs) { return xs; }

}  // namespace

TEST_CASE("gamma for two coordinate residues") {
  auto e = build_gamma({{RES_Z, RES_W}, rho_rho()});
  // Hand expansion: lambda1 lambda2 / (lambda1 (lambda1+1) lambda2 (lambda2+1)), orientation +1.
  for (int trial = 0; trial < 20; ++trial) {
    Rational l1 = gen::rational() + 20, l2 = gen::rational() + 20;
    CHECK(value(eval_at_point(e, {l1, l2})) == tpi(1 / ((l1 + 1) * (l2 + 1)), 2));
  }
  CHECK(value(eval_at_point(e, point({1, 1}))) == tpi(Rational(1, 4), 2));
}

TEST_CASE("gamma for z then zw") {
  auto e = build_gamma({{RES_Z, RES_ZW}, z_rho_rho()});
  for (int trial = 0; trial < 20; ++trial) {
    Rational l1 = gen::rational() + 20, l2 = gen::rational() + 20;
    CHECK(value(eval_at_point(e, {l1, l2})) == tpi(l1 / ((l1 + l2) * (l1 + l2 + 1) * (l2 + 1)), 2));
  }
  CHECK(value(eval_at_point(e, point({1, 1}))) == tpi(Rational(1, 12), 2));
  CHECK(std::holds_alternative<PoleHit>(eval_at_point(e, point({1, -1}))));
}

TEST_CASE("gamma for a principal value step") {
  auto e = build_gamma({{ProductStep::pv({1})}, TestForm::monomial(1, {1}, {0}, {0}, 1)});
  Rational l(7, 3);
  CHECK(value(eval_at_point(e, {l})) == tpi(1 / ((l + 1) * (l + 2)), 1));
  CHECK(value(iterated_limit(e)) == tpi(Rational(1, 2), 1));
}

TEST_CASE("gamma rejects unsupported inputs") {
  TestForm phi = rho_rho();
  phi.profiles[0] = RadialProfile::plateau(2);
  CHECK_THROWS_AS(build_gamma({{RES_Z, RES_W}, phi}), NonBetaProfile);
  CHECK_THROWS_AS(parse_monomial("x1+x2", 2), NonMonomialStep);
  CHECK(parse_monomial("x1^2*x2", 2) == std::vector<int>{2, 1});
  CHECK(parse_monomial("1", 2) == std::vector<int>{0, 0});
}

TEST_CASE("iterated limits of the two-step examples") {
  CHECK(value(iterated_limit(build_gamma({{RES_Z, RES_ZW}, z_rho_rho()}))).is_zero());
  auto zw_z = value(iterated_limit(build_gamma({{RES_ZW, RES_Z}, z_rho_rho()})));
  CHECK(zw_z == tpi(-1, 2));
  CHECK(zw_z == pair_with_testform(sequential_product({RES_ZW, RES_Z}), z_rho_rho()));

  auto e = build_gamma({{RES_Z, RES_W}, rho_rho()});
  CHECK(value(iterated_limit(e, {0, 1})) == tpi(1, 2));
  CHECK(value(iterated_limit(e, {1, 0})) == tpi(1, 2));
}

TEST_CASE("one-variable substitutions") {
  auto z_zw = build_gamma({{RES_Z, RES_ZW}, z_rho_rho()});
  auto zw_z = build_gamma({{RES_ZW, RES_Z}, z_rho_rho()});
  auto z_w = build_gamma({{RES_Z, RES_W}, rho_rho()});
  CHECK(value(aswy_limit(z_zw, {3, 1})).is_zero());
  CHECK(value(aswy_limit(zw_z, {3, 1})) == tpi(-1, 2));
  CHECK(value(aswy_limit(z_w, {2, 1})) == tpi(1, 2));
  // Diagonal approach to the origin: lambda1 / (2t) -> 1/2 instead of the sequential 0.
  CHECK(value(power_substitution_limit(z_zw, {1, 1})) == tpi(Rational(1, 2), 2));
  CHECK(value(power_substitution_limit(z_w, {1, 1})) == tpi(1, 2));
  CHECK_THROWS(aswy_limit(z_w, {1, 2}));
}

TEST_CASE("a bare pole is reported") {
  MellinExpr e(1);
  e.add({ExactScalar(1), {0}, {{AffineForm({1}), UniRat(Poly::constant(1), {Rational(0)})}}});
  auto r = iterated_limit(e);
  REQUIRE(std::holds_alternative<PoleReport>(r));
  CHECK(std::get<PoleReport>(r).order == -1);
  CHECK(std::holds_alternative<PoleReport>(aswy_limit(e, {1})));
}

TEST_CASE("a cross pole cancelled between products is not reported") {
  // 1/(l1 + l2) - 1/(l1 + l2) + l1 / (l1 (l2 + 1)): the first two cancel at the product level
  // only after expansion in l1.
  MellinExpr e(2);
  UniRat inv(Poly::constant(1), {Rational(0)});
  e.add({ExactScalar(1), {0, 0}, {{AffineForm({1, 1}), inv}, {AffineForm({0, 1}), UniRat(Poly::monomial(1, 1), {Rational(1)})}}});
  e.add({ExactScalar(-1), {0, 0}, {{AffineForm({1, 1}), inv}, {AffineForm({0, 1}), UniRat(Poly::constant(1), {Rational(1)})}}});
  // (l2 / (l2 + 1) - 1 / (l2 + 1)) / (l1 + l2) = (l2 - 1) / ((l2 + 1)(l1 + l2)); limit l1 then l2 is a pole.
  auto r = iterated_limit(e);
  REQUIRE(std::holds_alternative<PoleReport>(r));
  CHECK(std::get<PoleReport>(r).variable == 1);
}

TEST_CASE("pole lines near the orthant") {
  auto lines = pole_lines_near_orthant(build_gamma({{RES_Z, RES_ZW}, z_rho_rho()}));
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].form == AffineForm({1, 1}));
  CHECK(lines[0].certified);
  CHECK(to_string(lines[0]) == "λ1+λ2=0: certified");

  CHECK(pole_lines_near_orthant(build_gamma({{RES_Z, RES_W}, rho_rho()})).empty());
  CHECK(pole_lines_near_orthant(build_gamma({{ProductStep::res({2})}, TestForm::monomial(1, {1}, {0}, {}, 1)})).empty());

  // A removable candidate: 1/(l1 + l2) - 1/(l1 + l2 + 1) - 1/((l1 + l2)(l1 + l2 + 1)) = 0
  // with the pieces stored as separate products.
  MellinExpr e(2);
  AffineForm s({1, 1});
  e.add({ExactScalar(1), {0, 0}, {{s, UniRat(Poly::constant(1), {Rational(0)})}}});
  e.add({ExactScalar(-1), {0, 0}, {{s, UniRat(Poly::constant(1), {Rational(1)})}}});
  e.add({ExactScalar(-1), {0, 0}, {{s, UniRat(Poly::constant(1), {Rational(0), Rational(1)})}}});
  auto removable = pole_lines_near_orthant(e);
  REQUIRE(removable.size() == 1);
  CHECK_FALSE(removable[0].certified);
}

TEST_CASE("triangle identity on the randomized catalog") {
  CatalogConfig cfg;
  cfg.count = 200;
  int nonzero = 0;
  for (const auto& c : monomial_catalog(cfg)) {
    CAPTURE(c.name);
    auto exact = pair_with_testform(sequential_product(c.steps), c.testform);
    auto e = build_gamma({c.steps, c.testform});
    auto lim = iterated_limit(e);
    REQUIRE(std::holds_alternative<ScalarSum>(lim));
    CHECK(std::get<ScalarSum>(lim) == exact);
    auto as = aswy_limit(e, default_aswy_exponents(c.q()));
    REQUIRE(std::holds_alternative<ScalarSum>(as));
    CHECK(std::get<ScalarSum>(as) == exact);
    if (!exact.is_zero()) ++nonzero;
  }
  MESSAGE("nonzero catalog values: " << nonzero);
  CHECK(nonzero > 60);
}

TEST_CASE("complete intersections have no origin poles") {
  CatalogConfig cfg;
  cfg.count = 200;
  int checked = 0;
  for (const auto& c : monomial_catalog(cfg)) {
    auto e = build_gamma({c.steps, c.testform});
    for (const auto& p : e.products()) {
      for (const auto& f : p.factors) {
        for (long coeff : f.form.coeffs) CHECK(coeff >= 0);
      }
    }
    auto lines = pole_lines_near_orthant(e);
    for (const auto& l : lines) {
      if (!l.certified) continue;
      int positive = 0;
      for (long coeff : l.form.coeffs) positive += coeff > 0 ? 1 : 0;
      CHECK(positive >= 2);
    }
    if (c.disjoint_supports()) {
      CHECK(lines.empty());
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("witness scaling leaves lambda limits unchanged") {
  for (const auto& c : monomial_catalog({7, 40, 3, 3, 3, 3})) {
    auto steps = c.steps;
    for (auto& s : steps) {
      s.witness = s.regularizer();
      for (auto& w : s.witness) w *= 2;
    }
    CHECK(value(iterated_limit(build_gamma({steps, c.testform}))) ==
          value(iterated_limit(build_gamma({c.steps, c.testform}))));
  }
}

TEST_CASE("closed form rendering") {
  auto e = build_gamma({{RES_Z, RES_W}, rho_rho()});
  CHECK(to_string(e) == "(1 + 0 i) * (2*pi*i)^2 * 1/(λ1+1) * 1/(λ2+1)");
  auto f = build_gamma({{RES_Z, RES_ZW}, z_rho_rho()});
  CHECK(to_string(f) == "(1 + 0 i) * (2*pi*i)^2 * λ1 * 1/((λ1+λ2)(λ1+λ2+1)) * 1/(λ2+1)");
}
