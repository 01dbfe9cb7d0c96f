#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "residua/catalog.hpp"
#include "residua/cfl.hpp"
#include "residua/errors.hpp"

using namespace residua;

namespace {

const double kPi = 3.14159265358979323846;

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// chi'(v) for SmoothStep(3): chi(v) = S(2v - 1), S'(x) = 140 x^3 (1 - x)^3.
double smoothstep3_derivative(double v) {
  if (v <= 0.5 || v >= 1.0) return 0.0;
  const double x = 2.0 * v - 1.0;
  return 2.0 * 140.0 * x * x * x * (1.0 - x) * (1.0 - x) * (1.0 - x);
}

VectorSection pair_section() { return VectorSection::monomials(2, {{1, 0}, {0, 1}}, {1, 1}); }

}  // namespace

TEST_CASE("holomorphic polynomials") {
  const auto p = HoloPoly::parse("3*x1^2*x2 - x2 + 0.5 + 2*i*x1", 2);
  const std::vector<Complex> x{{0.3, -0.2}, {1.1, 0.4}};
  const Complex want = 3.0 * x[0] * x[0] * x[1] - x[1] + 0.5 + Complex(0, 2) * x[0];
  CHECK(std::abs(p.eval(x) - want) < 1e-14);
  CHECK(std::abs(p.derivative(x, 0) - (6.0 * x[0] * x[1] + Complex(0, 2))) < 1e-14);
  CHECK(std::abs(p.derivative(x, 1) - (3.0 * x[0] * x[0] - 1.0)) < 1e-14);
  CHECK(p.degree() == 3);
  CHECK(HoloPoly::parse("x1 - x1", 1).is_zero());
  CHECK_THROWS_AS(HoloPoly::parse("x3", 2), ParseError);
  CHECK_THROWS_AS(HoloPoly::parse("x1 +", 2), ParseError);
  CHECK_THROWS_AS(HoloPoly::parse("y1", 2), ParseError);
  CHECK_THROWS_AS(HoloPoly::parse("", 2), ParseError);
}

TEST_CASE("polynomial text round trip") {
  CHECK(HoloPoly::parse("x1", 2).to_string() == "x1");
  CHECK(HoloPoly::parse("-x1*x2^3 + 0.5", 2).to_string() == "0.5 - x1*x2^3");
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> exp(0, 3);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    HoloPoly p;
    p.n = 2;
    for (int t = 0; t < 3; ++t) {
      const double im = trial % 2 ? coef(rng) : 0.0;
      p.coeff[{exp(rng), exp(rng)}] = Complex(coef(rng), im);
    }
    const HoloPoly q = HoloPoly::parse(p.to_string(), 2);
    CHECK(q.coeff == p.coeff);
  }
}

TEST_CASE("minimal section") {
  const auto f = pair_section();
  auto s = minimal_section_eval(f, {{1, 0}, {0, 0}});
  CHECK(s[0] == Complex(1, 0));
  CHECK(s[1] == Complex(0, 0));
  s = minimal_section_eval(f, {{0, 1}, {1, 0}});
  CHECK(s[0] == Complex(0, -1));
  CHECK(s[1] == Complex(1, 0));
  CHECK(std::abs(Complex(0, 1) * s[0] + Complex(1, 0) * s[1] - 2.0) < 1e-15);
  const auto sq = VectorSection::monomials(1, {{2}}, {1});
  CHECK(minimal_section_eval(sq, {{2, 0}})[0] == Complex(4, 0));
  CHECK_THROWS_AS(minimal_section_eval(f, {{0, 0}, {0, 0}}), ZeroSection);
}

TEST_CASE("f . s = |f|^2 at random points") {
  std::mt19937_64 rng(314159);
  std::normal_distribution<double> gauss;
  VectorSection f;
  f.n = 2;
  f.components = {HoloPoly::parse("x1^2 + 3*x2", 2), HoloPoly::parse("x1*x2 - 2*i", 2), HoloPoly::parse("x2^3", 2)};
  f.support_witness = {1, 1};
  f.validate();
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const std::vector<Complex> x{{gauss(rng), gauss(rng)}, {gauss(rng), gauss(rng)}};
    const auto s = minimal_section_eval(f, x);
    Complex fs;
    double norm = 0.0;
    for (int a = 0; a < f.rank(); ++a) {
      const Complex v = f.components[static_cast<std::size_t>(a)].eval(x);
      fs += v * s[static_cast<std::size_t>(a)];
      norm += std::norm(v);
    }
    worst = std::max(worst, std::abs(fs - norm) / norm);
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("factor evaluation") {
  SUBCASE("rank one U is 1/f where chi = 1") {
    auto U = CFLFactorSpec::U(VectorSection::monomials(1, {{1}}, {1}), 1);
    U.epsilon = 1e-3;
    const Complex z(0.4, -0.3);
    const auto ff = cfl_factor_eval(U, {z});
    REQUIRE(ff.count(1) == 1);
    CHECK(std::abs(ff.at(1).coeff(0) - 1.0 / z) < 1e-15);
  }
  SUBCASE("R0 of a nonvanishing section vanishes") {
    auto R0 = CFLFactorSpec::R(VectorSection::monomials(1, {{0}}, {0}), 0);
    for (double eps : {0.5, 1e-3}) {
      R0.epsilon = eps;
      const auto ff = cfl_factor_eval(R0, {{0.2, 0.1}});
      CHECK(ff.at(0).coeff(0) == Complex(0, 0));
    }
  }
  SUBCASE("R0 equals 1 - chi") {
    auto R0 = CFLFactorSpec::R(VectorSection::monomials(1, {{1}}, {1}), 0);
    R0.epsilon = 0.1;
    // |z|^2 / eps = 0.75.
    const auto ff = cfl_factor_eval(R0, {{std::sqrt(0.075), 0.0}});
    const double x = 0.5;
    const double S = x * x * x * x * (35 - 84 * x + 70 * x * x - 20 * x * x * x);
    CHECK(std::abs(ff.at(0).coeff(0) - (1.0 - S)) < 1e-14);
  }
  SUBCASE("u2 against finite differences of s") {
    VectorSection f;
    f.n = 2;
    f.components = {HoloPoly::parse("x1^2 + x2", 2), HoloPoly::parse("x1*x2", 2)};
    f.support_witness = {1, 1};
    auto U = CFLFactorSpec::U(f, 2);
    U.epsilon = 1e-12;
    const std::vector<Complex> x{{0.7, 0.2}, {-0.4, 0.5}};
    const auto ff = cfl_factor_eval(U, x);
    auto s_at = [&](const std::vector<Complex>& y) { return minimal_section_eval(f, y); };
    const auto s = s_at(x);
    double f2 = 0.0;
    for (const auto& c : f.components) f2 += std::norm(c.eval(x));
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
      // dbar = (d/da + i d/db) / 2 for x_i = a + i b.
      std::vector<std::vector<Complex>> pts(4, x);
      pts[0][static_cast<std::size_t>(i)] += Complex(h, 0);
      pts[1][static_cast<std::size_t>(i)] -= Complex(h, 0);
      pts[2][static_cast<std::size_t>(i)] += Complex(0, h);
      pts[3][static_cast<std::size_t>(i)] -= Complex(0, h);
      std::vector<Complex> dbar_s(2);
      for (int a = 0; a < 2; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const Complex da = (s_at(pts[0])[ua] - s_at(pts[1])[ua]) / (2 * h);
        const Complex db = (s_at(pts[2])[ua] - s_at(pts[3])[ua]) / (2 * h);
        dbar_s[ua] = 0.5 * (da + Complex(0, 1) * db);
      }
      // s ^ dbar s = sum_ab s_a e_a ^ dbar s_b ^ e_b, frames moved right.
      const Complex want = (s[1] * dbar_s[0] - s[0] * dbar_s[1]) / (f2 * f2);
      CAPTURE(i);
      CHECK(rel(ff.at(3).coeff(std::uint32_t{1} << (2 * i)), want) < 1e-6);
    }
  }
  SUBCASE("errors") {
    auto U = CFLFactorSpec::U(pair_section(), 1);
    U.epsilon = 1e-2;
    CHECK_THROWS_AS(cfl_factor_eval(U, {{0, 0}, {0, 0}}), OnZeroSet);
    VectorSection big;
    big.n = 1;
    for (int a = 0; a < 4; ++a) big.components.push_back(HoloPoly::monomial({a + 1}));
    big.support_witness = {1};
    CHECK_THROWS_AS(big.validate(), RankTooLarge);
    VectorSection zero;
    zero.n = 1;
    zero.components = {HoloPoly::parse("0", 1)};
    zero.support_witness = {1};
    CHECK_THROWS_AS(zero.validate(), ZeroSection);
    CHECK_THROWS_AS(CFLFactorSpec::U(pair_section(), 3).validate(), std::invalid_argument);
    CHECK_THROWS_AS(CFLFactorSpec::U(pair_section(), 0).validate(), std::invalid_argument);
  }
}

TEST_CASE("pairing degree and shape checks") {
  const auto phi = TestForm::monomial(2, {0, 0}, {0, 0}, {0});
  CHECK_THROWS_AS(cfl_pairing({CFLFactorSpec::R(pair_section(), 2)}, phi, GridSpec{}), DegreeMismatch);
  auto R = CFLFactorSpec::R(pair_section(), 1);
  R.epsilon = 1e-2;
  R.cutoff = CutoffProfile::indicator();
  CHECK_THROWS_AS(cfl_pairing({R}, phi, GridSpec{}), DerivativeOfIndicator);
  CHECK_THROWS_AS(cfl_pairing({}, phi, GridSpec{}), EmptyProduct);
  const auto phi3 = TestForm::monomial(3, {0, 0, 0}, {0, 0, 0}, {0, 1});
  auto R3 = CFLFactorSpec::R(VectorSection::monomials(3, {{1, 0, 0}}, {1, 0, 0}), 1);
  R3.epsilon = 1e-2;
  CHECK_THROWS_AS(cfl_pairing({R3}, phi3, GridSpec{}), DimensionMismatch);
}

TEST_CASE("rank one reduces to 1/z") {
  const auto phi = TestForm::monomial(1, {1}, {0}, {0}, 1);
  const auto r = cfl_product_eval({CFLFactorSpec::U(VectorSection::monomials(1, {{1}}, {1}), 1)}, phi,
                                  EpsilonSchedule::iterated(), {}, GridSpec{});
  CHECK(rel(r.value, Complex(0, kPi)) < 1e-2);
  CHECK(rel(r.value, Complex(0, kPi)) < 1e-8);
}

TEST_CASE("rank one agrees with the scalar engine on the catalog") {
  CatalogConfig cfg;
  cfg.count = 60;
  int checked = 0;
  for (const auto& c : monomial_catalog(cfg)) {
    if (c.n() > 2 || checked >= 10) continue;
    ++checked;
    std::vector<double> eps;
    std::vector<CFLFactorSpec> factors;
    for (int j = 0; j < c.q(); ++j) {
      const auto& st = c.steps[static_cast<std::size_t>(j)];
      eps.push_back(std::pow(10.0, -2 - j));
      const auto f = VectorSection::monomials(c.n(), {st.gamma}, st.regularizer());
      factors.push_back(st.kind == ProductStep::Kind::RES ? CFLFactorSpec::R(f, 1) : CFLFactorSpec::U(f, 1));
      factors.back().epsilon = eps.back();
    }
    const auto scalar = eval_regularized_integral(
        RegularizedSpec::uniform(c.steps, c.testform, CutoffProfile::smooth_step(3), eps), GridSpec{});
    const auto cfl = cfl_pairing(factors, c.testform, GridSpec{});
    CAPTURE(c.name);
    CHECK(std::abs(cfl.value - scalar.value) <= 1e-7 * std::max(std::abs(scalar.value), 1e-3));
  }
  CHECK(checked == 10);
}

TEST_CASE("rank two residue at fixed eps against a direct radial integral") {
  const double eps = 1e-2;
  auto R = CFLFactorSpec::R(pair_section(), 2);
  R.epsilon = eps;
  const auto phi = TestForm::monomial(2, {0, 0}, {0, 0}, {}, 2);
  const auto got = cfl_pairing({R}, phi, GridSpec{});

  // -8 pi^2 int chi'(v) v rho(t1) rho(t2) / (t1 + t2)^2 dt1 dt2 with v = t1 t2 / eps,
  // in t1 = e^a, t2 = eps e^s / t1.
  using boost::math::quadrature::gauss_kronrod;
  auto rho = [](double t) { return t >= 1.0 ? 0.0 : (1.0 - t) * (1.0 - t); };
  auto inner = [&](double s) {
    const double v = std::exp(s);
    const double lo = s + std::log(eps);
    auto g = [&](double a) {
      const double t1 = std::exp(a);
      const double t2 = eps * v / t1;
      return rho(t1) * rho(t2) * t1 * t2 / ((t1 + t2) * (t1 + t2));
    };
    const double mid = 0.5 * lo;
    return smoothstep3_derivative(v) * v *
           (gauss_kronrod<double, 61>::integrate(g, lo, mid, 15, 1e-13) +
            gauss_kronrod<double, 61>::integrate(g, mid, 0.0, 15, 1e-13));
  };
  const double want = -8.0 * kPi * kPi * gauss_kronrod<double, 61>::integrate(inner, -std::log(2.0), 0.0, 15, 1e-13);
  CHECK(rel(got.value, want) < 1e-8);
}

TEST_CASE("principalized rank two: f = z (1, w)") {
  // u1 = (e1 + conj(w) e2) / (z (1 + |w|^2)); the e1 component paired with z rho rho.
  const VectorSection f = VectorSection::monomials(2, {{1, 0}, {1, 1}}, {1, 0});
  const auto phi = TestForm::monomial(2, {1, 0}, {0, 0}, {0, 1}, 2);
  // 4 pi^2 int (1-t)^2 dt * int (1-t)^2 / (1 + t) dt.
  const double want = 4.0 * kPi * kPi * (1.0 / 3.0) * (4.0 * std::log(2.0) - 2.5);
  const auto r =
      cfl_product_eval({CFLFactorSpec::U(f, 1)}, phi, EpsilonSchedule::iterated(), {}, GridSpec{});
  CHECK(rel(r.value, want) < 1e-6);

  SUBCASE("cutoff argument invariance") {
    VectorSection doubled = f;
    doubled.support_witness = {2, 0};
    const auto d =
        cfl_product_eval({CFLFactorSpec::U(doubled, 1)}, phi, EpsilonSchedule::iterated(), {}, GridSpec{});
    CHECK(std::abs(d.value - r.value) <= d.uncertainty + r.uncertainty + 1e-9);
  }
  SUBCASE("the e2 component") {
    auto U = CFLFactorSpec::U(f, 1);
    U.component = {1};
    // conj(w) / (z (1 + |w|^2)) pairs with z w: 4 pi^2 int (1-t)^2 dt * int t (1-t)^2 / (1 + t) dt.
    const auto phi2 = TestForm::monomial(2, {1, 1}, {0, 0}, {0, 1}, 2);
    const double tail = 1.0 / 3.0 - (4.0 * std::log(2.0) - 2.5);
    const auto e2 = cfl_product_eval({U}, phi2, EpsilonSchedule::iterated(), {}, GridSpec{});
    CHECK(rel(e2.value, 4.0 * kPi * kPi * (1.0 / 3.0) * tail) < 1e-6);
  }
}

TEST_CASE("rank one products match the scalar engine in both orders") {
  const auto z = VectorSection::monomials(2, {{1, 0}}, {1, 0});
  const auto zw = VectorSection::monomials(2, {{1, 1}}, {1, 1});
  const auto phi = TestForm::monomial(2, {1, 0}, {0, 0}, {});
  const auto res_z = ProductStep::res({1, 0});
  const auto res_zw = ProductStep::res({1, 1});
  for (const bool zw_first : {true, false}) {
    const std::vector<double> eps{1e-8, 1e-2};
    auto inner = CFLFactorSpec::R(zw_first ? zw : z, 1);
    auto outer = CFLFactorSpec::R(zw_first ? z : zw, 1);
    inner.epsilon = eps[0];
    outer.epsilon = eps[1];
    const std::vector<ProductStep> steps = zw_first ? std::vector<ProductStep>{res_zw, res_z}
                                                    : std::vector<ProductStep>{res_z, res_zw};
    const auto scalar = eval_regularized_integral(
        RegularizedSpec::uniform(steps, phi, CutoffProfile::smooth_step(3), eps), GridSpec{});
    const auto cfl = cfl_pairing({inner, outer}, phi, GridSpec{});
    CAPTURE(zw_first);
    CHECK(std::abs(cfl.value - scalar.value) <= 1e-7 * std::max(std::abs(scalar.value), 1.0));
  }
}
