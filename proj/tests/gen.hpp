#pragma once

// Fixed-seed generators shared by the property suites.

#include <random>
#include <vector>

#include "residua/currents.hpp"
#include "residua/exact.hpp"

namespace residua::gen {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eed2024ULL);
  return engine;
}

inline int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline Rational rational(int span = 9) {
  int den = uniform(1, span);
  Rational r(uniform(-span, span), den);
  r.canonicalize();
  return r;
}

inline Gaussian gaussian(int span = 5) { return {rational(span), rational(span)}; }

inline std::vector<int> exponents(int n, int max) {
  std::vector<int> v(static_cast<size_t>(n));
  for (auto& x : v) x = uniform(0, max);
  return v;
}

inline std::vector<int> nonzero_exponents(int n, int max) {
  for (;;) {
    auto v = exponents(n, max);
    for (int x : v) {
      if (x > 0) return v;
    }
  }
}

/// Random sum of elementary terms respecting support disjointness.
inline CurrentSum current(int n, int max_exp, int terms) {
  CurrentSum T(n);
  for (int t = 0; t < terms; ++t) {
    ElementaryTerm e;
    e.n = n;
    e.pv.assign(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      int what = uniform(0, 2);
      if (what == 1) e.pv[static_cast<size_t>(i)] = uniform(1, max_exp);
      if (what == 2) e.res[i] = uniform(1, max_exp);
    }
    e.coeff = ExactScalar(gaussian(), static_cast<int>(e.res.size()));
    T.add(e);
  }
  return T;
}

}  // namespace residua::gen
