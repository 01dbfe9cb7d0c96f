#pragma once

// Exact lambda-regularization of sequential products of monomial steps paired with Beta-kernel
// test forms. The integral is a finite sum of products of univariate rational functions of
// integer affine forms in lambda_1..lambda_q.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "residua/currents.hpp"
#include "residua/exact.hpp"
#include "residua/testforms.hpp"

namespace residua {

/// rat(form(lambda)).
struct MellinFactor {
  AffineForm form;
  UniRat rat;
};

/// scalar * prod_j lambda_j^{lambda_monomial[j]} * prod factors.
struct MellinProduct {
  ExactScalar scalar;
  std::vector<int> lambda_monomial;
  std::vector<MellinFactor> factors;
};

class MellinExpr {
 public:
  MellinExpr() = default;
  explicit MellinExpr(int q) : q_(q) {}

  int vars() const { return q_; }
  const std::vector<MellinProduct>& products() const { return products_; }
  bool is_zero() const { return products_.empty(); }

  /// Merges equal-form factors, folds constant factors into the scalar and combines products
  /// with identical shape.
  void add(MellinProduct p);
  /// Throws DimensionMismatch when a form or monomial references undeclared variables.
  void validate() const;

 private:
  int q_ = 0;
  std::vector<MellinProduct> products_;
};

/// Steps in processing order; step j carries lambda_{j+1}.
struct GammaSpec {
  std::vector<ProductStep> steps;
  TestForm testform;
};

/// Intermediate limit with a genuine pole: the coefficient of lambda_v^order is nonzero.
struct PoleReport {
  int variable = 0;
  int order = 0;
};

using LimitResult = std::variant<ScalarSum, PoleReport>;

struct PoleHit {
  size_t product = 0;
  AffineForm hyperplane;
};

using PointValue = std::variant<ScalarSum, PoleHit>;

struct PoleLine {
  AffineForm form;
  bool certified = false;
};

MellinExpr build_gamma(const GammaSpec& spec);

/// Sends lambda_{order[0]} to 0 first, then lambda_{order[1]}, ... (0-based indices).
LimitResult iterated_limit(const MellinExpr& e, const std::vector<int>& order, std::uint64_t seed = 0x9e3779b97f4a7c15ULL);
/// Processing order 0, 1, ..., q-1.
LimitResult iterated_limit(const MellinExpr& e);

/// Limit along lambda_j = t^{a_j}.
LimitResult aswy_limit(const MellinExpr& e, const std::vector<int>& a);
/// Limit along lambda_j = t^{a_j} for any positive exponents; a = (1, ..., 1) is the diagonal.
LimitResult power_substitution_limit(const MellinExpr& e, const std::vector<int>& a);
/// The default exponent vector (9, 3, 1) truncated to q entries.
std::vector<int> default_aswy_exponents(int q);

/// Origin hyperplanes sum_j c_j lambda_j = 0 among the denominators, each certified by exact
/// Laurent expansion along a seeded probe line crossing it.
std::vector<PoleLine> pole_lines_near_orthant(const MellinExpr& e, std::uint64_t seed = 0x51edULL);

PointValue eval_at_point(const MellinExpr& e, const std::vector<Rational>& lambda);

/// Laurent expansion in t of e(base + t * direction); orders strictly below `precision`.
std::map<int, ScalarSum> expand_along_line(const MellinExpr& e, const std::vector<Rational>& base,
                                           const std::vector<Rational>& direction, int precision);

std::string to_string(const MellinProduct& p);
std::string to_string(const MellinExpr& e);
std::string to_string(const PoleLine& line);

/// Parses a monomial such as "x1^2*x2" (or "1") into an exponent vector; throws
/// NonMonomialStep for sums or coefficients other than 1.
std::vector<int> parse_monomial(const std::string& text, int n);

}  // namespace residua
