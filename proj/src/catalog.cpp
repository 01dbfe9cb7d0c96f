#include "residua/catalog.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace residua {

bool CatalogCase::disjoint_supports() const {
  std::vector<int> used(static_cast<size_t>(n()), 0);
  for (const auto& s : steps) {
    for (int i = 0; i < n(); ++i) {
      if (s.gamma[static_cast<size_t>(i)] > 0 && used[static_cast<size_t>(i)]++ > 0) return false;
    }
  }
  return true;
}

namespace {

struct Draw {
  std::mt19937_64 rng;
  int operator()(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
};

Gaussian small_gaussian(Draw& d) {
  Rational re(d(-4, 4), d(1, 3));
  Rational im(d(-4, 4), d(1, 3));
  re.canonicalize();
  im.canonicalize();
  if (sgn(re) == 0 && sgn(im) == 0) re = 1;
  return {re, im};
}

}  // namespace

std::vector<CatalogCase> monomial_catalog(const CatalogConfig& cfg) {
  Draw d{std::mt19937_64(cfg.seed)};
  std::vector<CatalogCase> out;
  while (static_cast<int>(out.size()) < cfg.count) {
    const int n = d(1, cfg.max_n);
    const int q = d(1, cfg.max_q);
    CatalogCase c;
    c.name = "case" + std::to_string(out.size());
    std::vector<int> res_steps;
    for (int j = 0; j < q; ++j) {
      ProductStep s;
      s.kind = d(0, 3) == 0 ? ProductStep::Kind::PV : ProductStep::Kind::RES;
      s.gamma.assign(static_cast<size_t>(n), 0);
      // Sparse supports keep complete intersections and overlaps both common.
      const int width = d(1, n);
      std::vector<int> vars(static_cast<size_t>(n));
      std::iota(vars.begin(), vars.end(), 0);
      std::shuffle(vars.begin(), vars.end(), d.rng);
      for (int w = 0; w < width; ++w) s.gamma[static_cast<size_t>(vars[static_cast<size_t>(w)])] = d(1, cfg.max_exponent);
      if (d(0, 3) == 0) {
        s.witness = s.gamma;
        for (auto& x : s.witness) x *= d(1, 2);
      }
      if (s.kind == ProductStep::Kind::RES) res_steps.push_back(j);
      c.steps.push_back(std::move(s));
    }
    if (static_cast<int>(res_steps.size()) > n) continue;

    // Residue variables: a greedy injective choice inside each step's support.
    std::vector<bool> in_C(static_cast<size_t>(n), false);
    bool ok = true;
    for (int j : res_steps) {
      std::vector<int> options;
      for (int i = 0; i < n; ++i) {
        if (c.steps[static_cast<size_t>(j)].gamma[static_cast<size_t>(i)] > 0 && !in_C[static_cast<size_t>(i)]) options.push_back(i);
      }
      if (options.empty()) {
        ok = false;
        break;
      }
      in_C[static_cast<size_t>(options[static_cast<size_t>(d(0, static_cast<int>(options.size()) - 1))])] = true;
    }
    if (!ok) continue;

    std::vector<int> G(static_cast<size_t>(n), 0);
    for (const auto& s : c.steps) {
      for (int i = 0; i < n; ++i) G[static_cast<size_t>(i)] += s.gamma[static_cast<size_t>(i)];
    }
    TestForm& phi = c.testform;
    phi.n = n;
    for (int i = 0; i < n; ++i) {
      phi.profiles.push_back(RadialProfile::beta(d(1, cfg.max_beta_d)));
      if (!in_C[static_cast<size_t>(i)]) phi.M.push_back(i);
    }
    const int selected_terms = d(1, 2);
    for (int t = 0; t < selected_terms; ++t) {
      MultiIndex k(static_cast<size_t>(n));
      MultiIndex m(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        const auto iu = static_cast<size_t>(i);
        m[iu] = d(0, 2);
        k[iu] = G[iu] + m[iu] - (in_C[iu] ? 1 : 0);
      }
      phi.add(k, m, small_gaussian(d));
    }
    if (d(0, 2) == 0) {
      MultiIndex k(static_cast<size_t>(n));
      MultiIndex m(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        k[static_cast<size_t>(i)] = d(0, 4);
        m[static_cast<size_t>(i)] = d(0, 2);
      }
      phi.add(k, m, small_gaussian(d));
    }
    if (phi.coeff.empty()) continue;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace residua
