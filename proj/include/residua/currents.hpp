#pragma once

// Exact algebra of elementary currents c * (1/x^a) * wedge_j dbar(1/x_j^{b_j}) on C^n and the
// sequential product of principal-value / residue factors for monomial data.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "residua/exact.hpp"
#include "residua/testforms.hpp"

namespace residua {

/// c * (1/x^pv) * dbar(1/x_{j1}^{b_1}) ^ ... with residue factors in ascending index order.
/// Indices are 0-based internally.
struct ElementaryTerm {
  int n = 0;
  ExactScalar coeff;
  std::vector<int> pv;
  std::map<int, int> res;

  int antiholomorphic_degree() const { return static_cast<int>(res.size()); }
};

/// Sorts residue factors given in wedge order into ascending order, carrying the permutation
/// sign into the coefficient. A repeated residue index gives a zero coefficient.
ElementaryTerm normalize_term(int n, const ExactScalar& coeff, std::vector<int> pv,
                              const std::vector<std::pair<int, int>>& res_in_wedge_order);

class CurrentSum {
 public:
  using Key = std::pair<std::vector<int>, std::vector<std::pair<int, int>>>;

  CurrentSum() = default;
  explicit CurrentSum(int n) : n_(n) {}
  /// pv = 0, no residue factors, coefficient 1.
  static CurrentSum unit(int n);

  int n() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }
  const std::map<Key, ExactScalar>& raw() const { return terms_; }
  std::vector<ElementaryTerm> terms() const;

  void add(const ElementaryTerm& t);
  CurrentSum& operator+=(const CurrentSum& other);
  friend CurrentSum operator+(CurrentSum a, const CurrentSum& b) { return a += b; }
  friend CurrentSum operator-(const CurrentSum& a, const CurrentSum& b) { return a + b * ExactScalar(-1); }
  friend CurrentSum operator*(const CurrentSum& a, const ExactScalar& c);
  friend bool operator==(const CurrentSum& a, const CurrentSum& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

 private:
  void add(Key key, const ExactScalar& c);
  int n_ = 0;
  std::map<Key, ExactScalar> terms_;
};

struct ProductStep {
  enum class Kind { PV, RES };
  Kind kind = Kind::RES;
  std::vector<int> gamma;
  /// Exponent of the regularizing monomial |x^witness|^2; empty means gamma. Must have the
  /// same support as gamma.
  std::vector<int> witness;
  std::string label;

  static ProductStep res(std::vector<int> gamma, std::string label = {});
  static ProductStep pv(std::vector<int> gamma, std::string label = {});
  const std::vector<int>& regularizer() const { return witness.empty() ? gamma : witness; }
  /// Throws DimensionMismatch / std::invalid_argument / DegenerateStep on malformed steps.
  void validate(int n) const;
  friend bool operator==(const ProductStep& a, const ProductStep& b) {
    return a.kind == b.kind && a.gamma == b.gamma && a.regularizer() == b.regularizer();
  }
};

/// dbar on elementary currents; residue factors are dbar-closed.
CurrentSum dbar(const CurrentSum& T);

/// Value at lambda = 0 of (|x^g|^{2 lambda} / x^gamma) T, supp g = supp gamma.
CurrentSum pv_step(const std::vector<int>& gamma, const CurrentSum& T);

/// Value at lambda = 0 of (dbar |x^g|^{2 lambda} / x^gamma) ^ T, via the Leibniz identity
/// dbar(pv_step(T)) - pv_step(dbar T).
CurrentSum res_step(const std::vector<int>& gamma, const CurrentSum& T);

/// P_q ^ ... ^ P_1 for steps listed in processing order (steps.front() is the innermost factor).
CurrentSum sequential_product(const std::vector<ProductStep>& steps);

/// Sign of the permutation taking (dxbar_{dbar_order...}, dxbar_M ascending, dx_1..dx_n) to
/// (dxbar_1 ^ dx_1) ^ ... ^ (dxbar_n ^ dx_n); 0 if an antiholomorphic index repeats.
int orientation_sign(int n, const std::vector<int>& dbar_order, const std::vector<int>& M);

/// Exact action of T on the test form phi.
ScalarSum pair_with_testform(const CurrentSum& T, const TestForm& phi);

/// e.g. "dbar(1/x1^2)^dbar(1/x2)" rendered with the unicode symbols ∂̄ and ∧.
std::string to_string(const ElementaryTerm& t);
std::string to_string(const CurrentSum& T);

}  // namespace residua
