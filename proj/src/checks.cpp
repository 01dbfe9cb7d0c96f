#include "residua/checks.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "residua/catalog.hpp"
#include "residua/currents.hpp"
#include "residua/mellin.hpp"
#include "residua/quadrature.hpp"

namespace residua {

void CheckSummary::add(std::string name, bool ok, std::string detail) {
  items.push_back({std::move(name), ok, std::move(detail)});
}

int CheckSummary::failures() const {
  int f = 0;
  for (const auto& it : items) f += it.passed ? 0 : 1;
  return f;
}

io::Json CheckSummary::to_json() const {
  io::Json j;
  j["suite"] = suite;
  j["passed"] = passed();
  j["total"] = items.size();
  j["failures"] = failures();
  io::Json list = io::Json::array();
  for (const auto& it : items) {
    io::Json e;
    e["name"] = it.name;
    e["passed"] = it.passed;
    if (!it.detail.empty()) e["detail"] = it.detail;
    list.push_back(std::move(e));
  }
  j["items"] = std::move(list);
  return j;
}

namespace {

Complex numeric_value(const ScalarSum& x) {
  const auto z = x.to_complex();
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string fmt(const Complex& z) { return "(" + fmt(z.real()) + ", " + fmt(z.imag()) + ")"; }

ProductStep res(std::vector<int> g) { return ProductStep::res(std::move(g)); }

/// The exact value along the processing order, or nullopt at a pole.
std::optional<ScalarSum> exact_limit(const std::vector<ProductStep>& steps, const TestForm& phi) {
  const auto r = iterated_limit(build_gamma({steps, phi}));
  if (const auto* v = std::get_if<ScalarSum>(&r)) return *v;
  return std::nullopt;
}

GridSpec grid_for(const CheckOptions& opt) {
  GridSpec g;
  g.threads = opt.threads;
  return g;
}

int residue_count(const std::vector<ProductStep>& steps) {
  int r = 0;
  for (const auto& s : steps) r += s.kind == ProductStep::Kind::RES ? 1 : 0;
  return r;
}

}  // namespace

CheckSummary golden_suite(const CheckOptions&) {
  CheckSummary s{"golden", {}};
  const std::vector<ProductStep> zw_then_z{res({1, 1}), res({1, 0})};
  const std::vector<ProductStep> z_then_zw{res({1, 0}), res({1, 1})};
  const CurrentSum a = sequential_product(zw_then_z);
  const CurrentSum b = sequential_product(z_then_zw);
  CurrentSum expected(2);
  expected.add(normalize_term(2, ExactScalar(1), {0, 0}, {{0, 2}, {1, 1}}));
  s.add("(zw then z) = dbar(1/z^2) ^ dbar(1/w)", a == expected && to_string(a) == "∂̄(1/x1^2)∧∂̄(1/x2)", to_string(a));
  s.add("(z then zw) = 0", b.is_zero(), to_string(b));
  const TestForm phi = TestForm::monomial(2, {1, 0}, {0, 0}, {});
  const ScalarSum pa = pair_with_testform(a, phi);
  const auto la = exact_limit(zw_then_z, phi);
  s.add("(zw then z) pairing equals the lambda limit", la && *la == pa && !pa.is_zero(), to_string(pa));
  const auto lb = exact_limit(z_then_zw, phi);
  s.add("(z then zw) lambda limit vanishes", lb && lb->is_zero(), lb ? to_string(*lb) : "pole");
  return s;
}

CheckSummary triangle_suite(const CheckOptions& opt) {
  CheckSummary s{"triangle", {}};
  CatalogConfig cfg;
  cfg.seed = opt.seed;
  cfg.count = opt.catalog_size;
  const auto catalog = monomial_catalog(cfg);
  for (const auto& c : catalog) {
    const ScalarSum paired = pair_with_testform(sequential_product(c.steps), c.testform);
    const MellinExpr G = build_gamma({c.steps, c.testform});
    const LimitResult it = iterated_limit(G);
    const LimitResult aswy = aswy_limit(G, default_aswy_exponents(c.q()));
    const auto* iv = std::get_if<ScalarSum>(&it);
    const auto* av = std::get_if<ScalarSum>(&aswy);
    const bool ok = iv && av && *iv == paired && *av == paired;
    s.add(c.name + " exact", ok,
          "pairing " + to_string(paired) + ", iterated " + (iv ? to_string(*iv) : "pole") + ", aswy " +
              (av ? to_string(*av) : "pole"));
  }
  int numeric = 0;
  for (const auto& c : catalog) {
    if (numeric >= opt.numeric_cases) break;
    if (c.n() > 2 || c.q() > 2) continue;
    ++numeric;
    const Complex exact = numeric_value(pair_with_testform(sequential_product(c.steps), c.testform));
    const auto spec = RegularizedSpec::uniform(c.steps, c.testform, CutoffProfile::smooth_step(3));
    const NumericalResult r = iterated_limit_estimate(spec, EpsilonSchedule::iterated(), {}, grid_for(opt));
    const double err = std::abs(r.value - exact);
    // Zero limits are compared on the scale (2 pi)^{#RES} of a unit residue pairing.
    const double scale = std::abs(exact) > 0 ? std::abs(exact) : std::pow(2 * M_PI, residue_count(c.steps));
    s.add(c.name + " quadrature", err <= 1e-3 * scale,
          "exact " + fmt(exact) + ", estimate " + fmt(r.value) + ", rel " + fmt(err / scale));
  }
  if (numeric < opt.numeric_cases) {
    s.add("quadrature subcatalog size", false,
          std::to_string(numeric) + " of " + std::to_string(opt.numeric_cases) + " cases with n <= 2, q <= 2");
  }
  return s;
}

CheckSummary poles_suite(const CheckOptions& opt) {
  CheckSummary s{"poles", {}};
  auto lines_of = [&](const std::vector<ProductStep>& steps, const TestForm& phi) {
    return pole_lines_near_orthant(build_gamma({steps, phi}), opt.seed);
  };
  auto describe = [](const std::vector<PoleLine>& lines) {
    std::string d;
    for (const auto& l : lines) d += (d.empty() ? "" : "; ") + to_string(l);
    return d.empty() ? std::string("none") : d;
  };
  {
    const auto lines = lines_of({res({1, 0}), res({0, 1})}, TestForm::monomial(2, {0, 0}, {0, 0}, {}));
    s.add("f = (z, w): no pole lines", lines.empty(), describe(lines));
  }
  {
    const auto lines = lines_of({res({2, 0}), res({0, 3})}, TestForm::monomial(2, {1, 2}, {0, 0}, {}));
    s.add("f = (z^2, w^3): no pole lines", lines.empty(), describe(lines));
  }
  CatalogConfig cfg;
  cfg.seed = opt.seed;
  cfg.count = opt.catalog_size;
  int disjoint = 0;
  for (const auto& c : monomial_catalog(cfg)) {
    if (!c.disjoint_supports()) continue;
    ++disjoint;
    const auto lines = lines_of(c.steps, c.testform);
    s.add(c.name + " (disjoint supports): no pole lines", lines.empty(), describe(lines));
  }
  s.add("catalog has disjoint-support entries", disjoint > 0, std::to_string(disjoint));
  {
    const auto lines = lines_of({res({1, 0}), res({1, 1})}, TestForm::monomial(2, {1, 0}, {0, 0}, {}));
    bool ok = lines.size() == 1 && lines[0].certified && lines[0].form.constant == 0;
    if (ok) {
      int positive = 0;
      for (long c : lines[0].form.coeffs) positive += c > 0 ? 1 : 0;
      ok = positive >= 2 && to_string(lines[0]) == "λ1+λ2=0: certified";
    }
    s.add("(z then zw): exactly lambda1 + lambda2 = 0, certified", ok, describe(lines));
  }
  return s;
}

CheckSummary rates_suite(const CheckOptions& opt) {
  CheckSummary s{"rates", {}};
  struct Case {
    std::string name;
    std::vector<ProductStep> steps;
    TestForm phi;
  };
  const std::vector<Case> cases{
      {"f = (z, w)", {res({1, 0}), res({0, 1})}, TestForm::monomial(2, {0, 0}, {0, 0}, {})},
      {"f = (z^2, w)", {res({2, 0}), res({0, 1})}, TestForm::monomial(2, {1, 0}, {0, 0}, {})},
  };
  for (const auto& c : cases) {
    const Complex limit = numeric_value(pair_with_testform(sequential_product(c.steps), c.phi));
    std::vector<double> omegas;
    for (int order : {2, 3}) {
      std::vector<std::pair<double, double>> samples;
      for (int i = 0; i < 8; ++i) {
        const double eps = std::pow(10.0, -1.0 - 3.0 * i / 7.0);
        const auto spec = RegularizedSpec::uniform(c.steps, c.phi, CutoffProfile::smooth_step(order), {eps, eps});
        const auto r = eval_regularized_integral(spec, grid_for(opt));
        samples.emplace_back(eps, std::abs(r.value - limit));
      }
      const RateFit fit = rate_fit(samples);
      omegas.push_back(fit.omega);
      s.add(c.name + ", s = " + std::to_string(order) + ": omega > 0, R^2 > 0.9", fit.omega > 0 && fit.r2 > 0.9,
            "omega " + fmt(fit.omega) + ", R^2 " + fmt(fit.r2) + ", C " + fmt(fit.C));
    }
    const double spread = std::abs(omegas[0] - omegas[1]) / std::max(omegas[0], omegas[1]);
    s.add(c.name + ": omega stable within 20% across s", omegas[0] > 0 && omegas[1] > 0 && spread <= 0.2,
          "relative spread " + fmt(spread));
  }
  return s;
}

CheckSummary bridge_suite(const CheckOptions& opt) {
  CheckSummary s{"bridge", {}};
  CatalogConfig cfg;
  cfg.seed = opt.seed;
  cfg.count = opt.catalog_size;
  cfg.max_n = 2;
  cfg.max_q = 1;
  int taken = 0;
  for (const auto& c : monomial_catalog(cfg)) {
    if (taken >= 10) break;
    if (c.q() != 1) continue;
    const auto lam = exact_limit(c.steps, c.testform);
    if (!lam || lam->is_zero()) continue;
    ++taken;
    const Complex exact = numeric_value(*lam);
    GridSpec grid = grid_for(opt);
    auto base = RegularizedSpec::uniform(c.steps, c.testform, CutoffProfile::smooth_step(3));
    const auto e1 = iterated_limit_estimate(base, EpsilonSchedule::iterated(), {}, grid);
    const double rel = std::abs(e1.value - exact) / std::abs(exact);
    s.add(c.name + ": eps limit = lambda value", rel <= 1e-3, "lambda " + fmt(exact) + ", eps " + fmt(e1.value) + ", rel " + fmt(rel));

    auto doubled = base;
    for (auto& st : doubled.steps) {
      st.step.witness = st.step.gamma;
      for (int& v : st.step.witness) v *= 2;
    }
    const auto e2 = iterated_limit_estimate(doubled, EpsilonSchedule::iterated(), {}, grid);
    const double d2 = std::abs(e2.value - e1.value);
    s.add(c.name + ": witness 2 gamma", d2 <= e1.uncertainty + e2.uncertainty,
          "diff " + fmt(d2) + ", combined uncertainty " + fmt(e1.uncertainty + e2.uncertainty));

    auto weighted = base;
    for (auto& st : weighted.steps) st.weight = WeightPoly::radial_quadratic(c.n(), 0.5);
    GridSpec wgrid = grid;
    wgrid.tol = 1e-5;
    const auto e3 = iterated_limit_estimate(weighted, EpsilonSchedule::iterated(), {}, wgrid);
    const double d3 = std::abs(e3.value - e1.value);
    s.add(c.name + ": weight 1 + |x|^2/2", d3 <= e1.uncertainty + e3.uncertainty,
          "diff " + fmt(d3) + ", combined uncertainty " + fmt(e1.uncertainty + e3.uncertainty));
  }
  s.add("ten single-step specs", taken == 10, std::to_string(taken));
  return s;
}

const std::vector<std::string>& check_suite_names() {
  static const std::vector<std::string> names{"golden", "triangle", "poles", "rates", "bridge"};
  return names;
}

CheckSummary check_suite(const std::string& name, const CheckOptions& opt) {
  if (name == "golden") return golden_suite(opt);
  if (name == "triangle") return triangle_suite(opt);
  if (name == "poles") return poles_suite(opt);
  if (name == "rates") return rates_suite(opt);
  if (name == "bridge") return bridge_suite(opt);
  throw SchemaError("unknown check suite '" + name + "'");
}

}  // namespace residua
