#pragma once

// Cauchy-Fantappie-Leray currents of holomorphic tuples f = (f_1, ..., f_e) with the trivial
// metric: s = conj(f), u_k = s ^ (dbar s)^{k-1} / |f|^{2k}, regularized by the cutoff
// chi(|x^witness|^2 / eps).
//
// Frame elements e_1..e_e anticommute with the dxbar_i. A Lambda^k-valued form is reported
// through its coefficients omega_I in sum_I omega_I ^ e_I (frame elements on the right).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "residua/forms.hpp"
#include "residua/quadrature.hpp"
#include "residua/testforms.hpp"

namespace residua {

/// Holomorphic polynomial sum_k c_k x^k.
struct HoloPoly {
  int n = 0;
  std::map<MultiIndex, Complex> coeff;

  static HoloPoly monomial(MultiIndex k, Complex c = 1.0);
  /// Sums of terms such as "3*x1^2*x2", "-x2", "0.5"; throws ParseError.
  static HoloPoly parse(const std::string& text, int n);

  bool is_zero() const { return coeff.empty(); }
  /// Present when the polynomial is a single monomial.
  const MultiIndex* single_exponent() const { return coeff.size() == 1 ? &coeff.begin()->first : nullptr; }
  int degree() const;
  Complex eval(const std::vector<Complex>& x) const;
  /// d/dx_i.
  Complex derivative(const std::vector<Complex>& x, int i) const;
  std::string to_string() const;
};

struct VectorSection {
  int n = 0;
  std::vector<HoloPoly> components;
  /// Cutoff argument |x^witness|^2; its zero set must contain the common zeros of the components.
  std::vector<int> support_witness;

  static VectorSection monomials(int n, const std::vector<MultiIndex>& exponents, std::vector<int> witness);

  int rank() const { return static_cast<int>(components.size()); }
  /// True when every component is a single monomial.
  bool monomial() const;
  /// Throws DimensionMismatch, ZeroSection or RankTooLarge (rank > 3).
  void validate() const;
};

/// s = conj(f) at x; throws ZeroSection when f(x) = 0.
std::vector<Complex> minimal_section_eval(const VectorSection& f, const std::vector<Complex>& x);

struct CFLFactorSpec {
  enum class Kind { U, R };
  VectorSection section;
  int k = 1;
  Kind kind = Kind::R;
  CutoffProfile cutoff = CutoffProfile::smooth_step(3);
  double epsilon = 0.0;
  /// Frame indices of the paired component e_I, |I| = k; empty selects 0..k-1.
  std::vector<int> component;

  static CFLFactorSpec U(VectorSection f, int k);
  static CFLFactorSpec R(VectorSection f, int k);

  /// dxbar degree: k - 1 for U, k for R.
  int form_degree() const { return kind == Kind::U ? k - 1 : k; }
  std::uint32_t component_mask() const;
  /// Throws DimensionMismatch, ZeroSection, RankTooLarge or std::invalid_argument.
  void validate() const;
};

/// Coefficients omega_I keyed by the frame bitmask I.
using FrameForms = std::map<std::uint32_t, Form>;

/// chi u_k (U), dbar chi ^ u_k (R, k > 0) or 1 - chi (R, k = 0) at x, with eps = spec.epsilon.
/// Throws OnZeroSet when f(x) = 0 and the factor is singular there.
FrameForms cfl_factor_eval(const CFLFactorSpec& spec, const std::vector<Complex>& x);

/// <P_q ^ ... ^ P_1, phi> with specs[0] = P_1 innermost, at the epsilons stored in the specs.
/// Requires n <= 2 and total dxbar degree n - |M|; throws DegreeMismatch otherwise.
NumericalResult cfl_pairing(const std::vector<CFLFactorSpec>& specs, const TestForm& phi, const GridSpec& grid);

/// Limit of cfl_pairing along `schedule`, innermost factor first.
NumericalResult cfl_product_eval(const std::vector<CFLFactorSpec>& specs, const TestForm& phi,
                                 const EpsilonSchedule& schedule, const ExtrapolationConfig& config,
                                 const GridSpec& grid);

}  // namespace residua
