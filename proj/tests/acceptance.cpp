// Acceptance criteria A1..A9: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "residua/catalog.hpp"
#include "residua/cfl.hpp"
#include "residua/checks.hpp"
#include "residua/currents.hpp"
#include "residua/mellin.hpp"
#include "residua/quadrature.hpp"

using namespace residua;

namespace {

Complex numeric(const ScalarSum& x) {
  const auto z = x.to_complex();
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

ProductStep res(std::vector<int> g) { return ProductStep::res(std::move(g)); }

std::vector<CatalogCase> small_catalog(int count) {
  CatalogConfig cfg;
  std::vector<CatalogCase> out;
  for (const auto& c : monomial_catalog(cfg)) {
    if (static_cast<int>(out.size()) < count && c.n() <= 2 && c.q() <= 2) out.push_back(c);
  }
  return out;
}

// ------------------------------------------------------------ A5

CheckSummary order_dependence() {
  CheckSummary s{"A5", {}};
  const TestForm zphi = TestForm::monomial(2, {1, 0}, {0, 0}, {});
  const std::vector<ProductStep> z_then_zw{res({1, 0}), res({1, 1})};
  const MellinExpr G = build_gamma({z_then_zw, zphi});
  const LimitResult diag = power_substitution_limit(G, {1, 1});
  const ScalarSum sequential = pair_with_testform(sequential_product(z_then_zw), zphi);
  const ScalarSum half = ScalarSum(ExactScalar(Gaussian(Rational(1, 2)), 2));
  const ScalarSum minus_half = ScalarSum(ExactScalar(Gaussian(Rational(-1, 2)), 2));
  const auto* dv = std::get_if<ScalarSum>(&diag);
  s.add("(z then zw): diagonal = +-(2 pi i)^2 / 2", dv && (*dv == half || *dv == minus_half), dv ? to_string(*dv) : "pole");
  s.add("(z then zw): sequential value = 0", sequential.is_zero(), to_string(sequential));

  const TestForm phi = TestForm::monomial(2, {0, 0}, {0, 0}, {});
  const std::vector<ProductStep> z_then_w{res({1, 0}), res({0, 1})};
  const ScalarSum target = pair_with_testform(sequential_product(z_then_w), phi);
  const MellinExpr H = build_gamma({z_then_w, phi});
  auto agrees = [&](const LimitResult& r) {
    const auto* v = std::get_if<ScalarSum>(&r);
    return v && *v == target;
  };
  s.add("(z then w): order (1, 2)", agrees(iterated_limit(H, {0, 1})));
  s.add("(z then w): order (2, 1)", agrees(iterated_limit(H, {1, 0})));
  s.add("(z then w): aswy (9, 3)", agrees(aswy_limit(H, default_aswy_exponents(2))));
  s.add("(z then w): aswy (4, 1)", agrees(aswy_limit(H, {4, 1})));
  s.add("(z then w): power path (1, 3)", agrees(power_substitution_limit(H, {1, 3})));
  s.add("(z then w): diagonal", agrees(power_substitution_limit(H, {1, 1})), to_string(target));
  s.add("(z then w): value is nonzero", !target.is_zero());
  return s;
}

// ------------------------------------------------------------ A6

CheckSummary tube_vs_smooth() {
  CheckSummary s{"A6", {}};
  for (const auto& c : small_catalog(30)) {
    const auto smooth = RegularizedSpec::uniform(c.steps, c.testform, CutoffProfile::smooth_step(3));
    const auto tube = RegularizedSpec::uniform(c.steps, c.testform, CutoffProfile::indicator());
    const auto a = iterated_limit_estimate(tube, EpsilonSchedule::iterated(), {}, GridSpec{});
    const auto b = iterated_limit_estimate(smooth, EpsilonSchedule::iterated(), {}, GridSpec{});
    const double d = std::abs(a.value - b.value);
    s.add(c.name + ": tube = smooth", d <= a.uncertainty + b.uncertainty,
          "diff " + fmt(d) + ", combined uncertainty " + fmt(a.uncertainty + b.uncertainty));
  }
  const TestForm phi = TestForm::monomial(1, {0}, {0}, {});
  const Complex exact = numeric(pair_with_testform(sequential_product({res({1})}), phi));
  auto tube1 = RegularizedSpec::uniform({res({1})}, phi, CutoffProfile::indicator());
  // Beta(8) profile: the tube integral is 2 pi i rho(eps) = 2 pi i (1 - eps)^8 up to the sign of exact.
  double worst = 0.0;
  for (double eps : {0.3, 0.1, 1e-2, 1e-4}) {
    tube1.epsilon = {eps};
    const auto v = eval_tube_integral(tube1, GridSpec{});
    worst = std::max(worst, std::abs(v.value - exact * std::pow(1.0 - eps, 8)) / std::abs(exact));
  }
  s.add("1-D tube = 2 pi i rho(eps) at fixed eps", worst < 1e-12 && std::abs(std::abs(exact) - 2 * M_PI) < 1e-12,
        "max rel " + fmt(worst));
  tube1.epsilon.clear();
  const auto r = iterated_limit_estimate(tube1, EpsilonSchedule::iterated(), {}, GridSpec{});
  const double d = std::abs(r.value - exact);
  s.add("1-D tube limit = 2 pi i within its uncertainty", d <= r.uncertainty,
        "diff " + fmt(d) + ", uncertainty " + fmt(r.uncertainty));
  return s;
}

// ------------------------------------------------------------ A8

CheckSummary cfl_checks() {
  CheckSummary s{"A8", {}};
  const Complex target = std::pow(Complex(0, 2 * M_PI), 2);
  {
    const auto f = VectorSection::monomials(2, {{1, 0}, {0, 1}}, {1, 1});
    const auto phi = TestForm::monomial(2, {0, 0}, {0, 0}, {});
    const auto r = cfl_product_eval({CFLFactorSpec::R(f, 2)}, phi, EpsilonSchedule::iterated(), {}, GridSpec{});
    const double d = std::min(std::abs(r.value - target), std::abs(r.value + target)) / std::abs(target);
    s.add("R_2 of (z, w) with rho rho dz^dw = +-(2 pi i)^2 within 5%", d <= 0.05,
          "value (" + fmt(r.value.real()) + ", " + fmt(r.value.imag()) + "), rel " + fmt(d));
  }
  // Rank one: single factors on catalog steps and the two-factor product (zw then z).
  int singles = 0;
  for (const auto& c : monomial_catalog(CatalogConfig{})) {
    if (singles >= 4) break;
    if (c.q() != 1 || c.n() > 2) continue;
    ++singles;
    const ProductStep& st = c.steps[0];
    const auto f = VectorSection::monomials(c.n(), {st.gamma}, st.regularizer());
    const auto spec = st.kind == ProductStep::Kind::RES ? CFLFactorSpec::R(f, 1) : CFLFactorSpec::U(f, 1);
    const Complex exact = numeric(pair_with_testform(sequential_product(c.steps), c.testform));
    const auto r = cfl_product_eval({spec}, c.testform, EpsilonSchedule::iterated(), {}, GridSpec{});
    const double rel = std::abs(r.value - exact) / std::max(std::abs(exact), 1.0);
    s.add(c.name + ": rank-1 CFL = scalar", rel <= 1e-2, "rel " + fmt(rel));
  }
  {
    const auto z = VectorSection::monomials(2, {{1, 0}}, {1, 0});
    const auto zw = VectorSection::monomials(2, {{1, 1}}, {1, 1});
    const auto phi = TestForm::monomial(2, {1, 0}, {0, 0}, {});
    const Complex exact = numeric(pair_with_testform(sequential_product({res({1, 1}), res({1, 0})}), phi));
    const auto r = cfl_product_eval({CFLFactorSpec::R(zw, 1), CFLFactorSpec::R(z, 1)}, phi, EpsilonSchedule::iterated(),
                                    {}, GridSpec{});
    const double rel = std::abs(r.value - exact) / std::abs(exact);
    s.add("(zw then z): rank-1 CFL product = scalar", rel <= 1e-2, "rel " + fmt(rel));
  }
  return s;
}

// ------------------------------------------------------------ A9

CheckSummary structural() {
  CheckSummary s{"A9", {}};
  std::mt19937_64 rng(0xa9a9a9ULL);
  auto draw = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto gaussian = [&] {
    Rational re(draw(-6, 6), draw(1, 5));
    Rational im(draw(-6, 6), draw(1, 5));
    re.canonicalize();
    im.canonicalize();
    return Gaussian(re, im);
  };
  auto current = [&](int n) {
    CurrentSum T(n);
    for (int t = draw(1, 4); t > 0; --t) {
      ElementaryTerm e;
      e.n = n;
      e.pv.assign(static_cast<size_t>(n), 0);
      for (int i = 0; i < n; ++i) {
        const int what = draw(0, 2);
        if (what == 1) e.pv[static_cast<size_t>(i)] = draw(1, 3);
        if (what == 2) e.res[i] = draw(1, 3);
      }
      e.coeff = ExactScalar(gaussian(), static_cast<int>(e.res.size()));
      T.add(e);
    }
    return T;
  };
  auto exponent = [&](int n) {
    std::vector<int> g(static_cast<size_t>(n), 0);
    while (std::all_of(g.begin(), g.end(), [](int v) { return v == 0; })) {
      for (auto& v : g) v = draw(0, 1) ? draw(1, 3) : 0;
    }
    return g;
  };
  const int trials = 100;

  int ok = 0;
  for (int t = 0; t < trials; ++t) ok += dbar(dbar(current(draw(1, 3)))).is_zero() ? 1 : 0;
  s.add("dbar o dbar = 0", ok == trials, std::to_string(ok) + "/" + std::to_string(trials));

  ok = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = 3;
    std::vector<int> vars{0, 1, 2};
    std::shuffle(vars.begin(), vars.end(), rng);
    const int q = draw(2, 3);
    std::vector<ProductStep> steps;
    for (int j = 0; j < q; ++j) {
      std::vector<int> g(n, 0);
      g[static_cast<size_t>(vars[static_cast<size_t>(j)])] = draw(1, 3);
      if (j + 1 == q && q == 2 && draw(0, 1)) g[static_cast<size_t>(vars[2])] = draw(1, 3);
      steps.push_back(draw(0, 2) ? ProductStep::res(g) : ProductStep::pv(g));
    }
    std::vector<int> perm(static_cast<size_t>(q));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ProductStep> permuted;
    std::vector<int> res_order;
    for (int p : perm) {
      permuted.push_back(steps[static_cast<size_t>(p)]);
      if (steps[static_cast<size_t>(p)].kind == ProductStep::Kind::RES) res_order.push_back(p);
    }
    const int sign = permutation_sign(res_order);
    ok += sequential_product(permuted) == sequential_product(steps) * ExactScalar(sign) ? 1 : 0;
  }
  s.add("permutation-sign law on disjoint supports", ok == trials, std::to_string(ok) + "/" + std::to_string(trials));

  ok = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = draw(1, 3);
    const CurrentSum A = current(n);
    const CurrentSum B = current(n);
    const auto g = exponent(n);
    ok += pv_step(g, A + B) == pv_step(g, A) + pv_step(g, B) && res_step(g, A + B) == res_step(g, A) + res_step(g, B) ? 1 : 0;
  }
  s.add("pv_step and res_step additivity", ok == trials, std::to_string(ok) + "/" + std::to_string(trials));

  ok = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = draw(1, 3);
    const CurrentSum A = current(n);
    const CurrentSum B = current(n);
    const ExactScalar a(gaussian());
    const ExactScalar b(gaussian());
    std::vector<int> M;
    for (int i = 0; i < n; ++i) {
      if (draw(0, 1)) M.push_back(i);
    }
    TestForm phi = TestForm::monomial(n, exponent(n), std::vector<int>(static_cast<size_t>(n), 0), M, 3);
    TestForm psi = phi;
    psi.coeff.clear();
    psi.add(exponent(n), std::vector<int>(static_cast<size_t>(n), 0), gaussian());
    psi.add(std::vector<int>(static_cast<size_t>(n), 1), std::vector<int>(static_cast<size_t>(n), 0), gaussian());
    TestForm sum = phi;
    for (const auto& [km, c] : psi.coeff) sum.add(km.first, km.second, c);
    const bool in_current =
        pair_with_testform(A * a + B * b, phi) == pair_with_testform(A, phi) * a + pair_with_testform(B, phi) * b;
    const bool in_form = pair_with_testform(A, sum) == pair_with_testform(A, phi) + pair_with_testform(A, psi);
    ok += in_current && in_form ? 1 : 0;
  }
  s.add("pairing linearity", ok == trials, std::to_string(ok) + "/" + std::to_string(trials));
  return s;
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<CheckSummary()> run;
};

}  // namespace

int main() {
  CheckOptions opt;
  const std::vector<Criterion> criteria{
      {"A1", "golden pair", [&] { return golden_suite(opt); }},
      {"A2", "triangle consistency", [&] {
         CheckOptions o = opt;
         o.numeric_cases = 30;
         return triangle_suite(o);
       }},
      {"A3", "regularization bridge", [&] { return bridge_suite(opt); }},
      {"A4", "pole lines", [&] { return poles_suite(opt); }},
      {"A5", "order dependence and robustness", order_dependence},
      {"A6", "tube vs smooth cutoff", tube_vs_smooth},
      {"A7", "rate law", [&] { return rates_suite(opt); }},
      {"A8", "CFL rank 2 and rank 1", cfl_checks},
      {"A9", "structural properties", structural},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckSummary s;
    std::string error;
    try {
      s = c.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = error.empty() && s.passed() && !s.items.empty();
    failed += ok ? 0 : 1;
    std::printf("%s %s %s: %zu/%zu checks [%.1f s]\n", c.id, ok ? "PASS" : "FAIL", c.title,
                s.items.size() - static_cast<size_t>(s.failures()), s.items.size(), dt);
    if (!error.empty()) std::printf("   error: %s\n", error.c_str());
    // Small criteria list every item; large ones only their failures.
    for (const auto& it : s.items) {
      if (!it.passed || s.items.size() <= 12) {
        std::printf("   %s %s%s%s%s\n", it.passed ? "ok" : "failed:", it.name.c_str(), it.detail.empty() ? "" : " (",
                    it.detail.c_str(), it.detail.empty() ? "" : ")");
      }
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
