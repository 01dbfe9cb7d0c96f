#pragma once

#include <map>
#include <utility>
#include <vector>

#include "residua/exact.hpp"

namespace residua {

using MultiIndex = std::vector<int>;

/// Radial bump rho(t), t = |x|^2, with rho(0) = 1 and support in [0, 1].
struct RadialProfile {
  enum class Kind { Beta, Plateau };
  Kind kind = Kind::Beta;
  /// d for Beta ((1-t)^d), smoothness order s for Plateau.
  int param = 8;

  static RadialProfile beta(int d);
  static RadialProfile plateau(int s);
  friend bool operator==(const RadialProfile&, const RadialProfile&) = default;
};

/// chi with chi = 0 near 0 and chi = 1 near infinity.
struct CutoffProfile {
  enum class Kind { SmoothStep, Indicator };
  Kind kind = Kind::SmoothStep;
  int s = 3;

  static CutoffProfile smooth_step(int s);
  static CutoffProfile indicator();
  friend bool operator==(const CutoffProfile&, const CutoffProfile&) = default;
};

/// sum_{k,m} c_{k,m} x^k xbar^m * prod_i rho_i(|x_i|^2) dxbar_M ^ dx_1 ^ ... ^ dx_n.
struct TestForm {
  int n = 0;
  std::map<std::pair<MultiIndex, MultiIndex>, Gaussian> coeff;
  std::vector<RadialProfile> profiles;
  /// Antiholomorphic index set, 0-based and ascending.
  std::vector<int> M;

  /// Single monomial coefficient x^k with default Beta profiles.
  static TestForm monomial(int n, MultiIndex k, MultiIndex m, std::vector<int> M, int beta_d = 8);
  void add(MultiIndex k, MultiIndex m, const Gaussian& c);
  /// Throws DimensionMismatch / std::invalid_argument on malformed input.
  void validate() const;
  /// Largest |k_i - m_i| over coefficients, used to size angular grids.
  int angular_degree() const;
};

/// Generalized smoothstep S_s on [0,1]: S(0)=0, S(1)=1, s vanishing derivatives at both ends.
const Poly& smoothstep_poly(int s);

/// mu(m) = int_0^inf t^m rho(t) dt.
Rational moment(const RadialProfile& rho, int m);

/// int_0^1 t^{K + l} (1-t)^d dt = d! / prod_{r=0}^{d} (l + K + 1 + r) as a function of l.
UniRat beta_mellin_moment(int d, int K);

double profile_eval(const RadialProfile& rho, double t);
Rational profile_eval(const RadialProfile& rho, const Rational& t);

/// chi(t) for deriv = 0, chi'(t) for deriv = 1.
double cutoff_eval(const CutoffProfile& chi, double t, int deriv = 0);

}  // namespace residua
