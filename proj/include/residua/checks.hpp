#pragma once

// Named consistency suites shared by the command line runner and the acceptance binary.

#include <cstdint>
#include <string>
#include <vector>

#include "residua/io.hpp"

namespace residua {

struct CheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckSummary {
  std::string suite;
  std::vector<CheckItem> items;

  void add(std::string name, bool passed, std::string detail = {});
  int failures() const;
  /// True for an empty summary as well.
  bool passed() const { return failures() == 0; }
  io::Json to_json() const;
};

struct CheckOptions {
  std::uint64_t seed = 20240601;
  int threads = 1;
  int catalog_size = 200;
  /// Quadrature cross-checks in the triangle suite; 0 keeps it exact.
  int numeric_cases = 0;
};

/// Exact golden pair: (zw then z) and (z then zw).
CheckSummary golden_suite(const CheckOptions& opt);
/// Catalog: sequential product = iterated Mellin limit = aswy limit, plus quadrature agreement on
/// the first `numeric_cases` entries with n <= 2 and q <= 2.
CheckSummary triangle_suite(const CheckOptions& opt);
/// Origin pole hyperplanes for complete intersections and for (z then zw).
CheckSummary poles_suite(const CheckOptions& opt);
/// Convergence-rate fits along the diagonal for f = (z, w) and (z^2, w), SmoothStep s in {2, 3}.
CheckSummary rates_suite(const CheckOptions& opt);
/// Epsilon limits against lambda = 0 values, with witness and weight invariance.
CheckSummary bridge_suite(const CheckOptions& opt);

/// Dispatches on golden, triangle, poles, rates, bridge; throws SchemaError otherwise.
CheckSummary check_suite(const std::string& name, const CheckOptions& opt);
const std::vector<std::string>& check_suite_names();

}  // namespace residua
