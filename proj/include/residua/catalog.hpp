#pragma once

// Seeded catalog of monomial step lists with test forms chosen so that the angular selection
// rule is met by at least one coefficient.

#include <cstdint>
#include <string>
#include <vector>

#include "residua/currents.hpp"
#include "residua/testforms.hpp"

namespace residua {

struct CatalogCase {
  std::string name;
  std::vector<ProductStep> steps;
  TestForm testform;

  int n() const { return testform.n; }
  int q() const { return static_cast<int>(steps.size()); }
  /// True when the steps have pairwise disjoint variable supports.
  bool disjoint_supports() const;
};

struct CatalogConfig {
  std::uint64_t seed = 20240601;
  int count = 200;
  int max_n = 3;
  int max_q = 3;
  int max_exponent = 3;
  int max_beta_d = 3;
};

std::vector<CatalogCase> monomial_catalog(const CatalogConfig& cfg);

}  // namespace residua
