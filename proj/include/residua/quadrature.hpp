#pragma once

// Numerical evaluation of epsilon-regularized products of monomial steps paired with test forms,
// tube integrals, iterated-limit extrapolation and convergence-rate fits. Radii are handled in the
// coordinates u_i = -log |x_i|^2, where every cutoff transition is a slab between two hyperplanes.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "residua/currents.hpp"
#include "residua/forms.hpp"
#include "residua/mellin.hpp"
#include "residua/testforms.hpp"

namespace residua {

/// Real polynomial sum c_{k,m} x^k xbar^m with c_{k,m} = c_{m,k}.
struct WeightPoly {
  int n = 0;
  std::map<std::pair<MultiIndex, MultiIndex>, double> coeff;

  static WeightPoly one(int n);
  /// 1 + a |x|^2.
  static WeightPoly radial_quadratic(int n, double a);
  void add(MultiIndex k, MultiIndex m, double c);

  bool is_one() const;
  /// Only terms with k = m, so w depends on |x_1|, ..., |x_n| alone.
  bool is_radial() const;
  int angular_degree() const;
  double eval(const std::vector<Complex>& x) const;
  /// d w / d xbar_i.
  Complex dbar(const std::vector<Complex>& x, int i) const;
  /// Throws std::invalid_argument when not real, NonPositiveWeight when not strictly positive on
  /// the closed unit polydisc. Returns (lower, upper) bounds there.
  std::pair<double, double> bounds(std::uint64_t seed = 0x77e16a7ULL) const;
};

struct RegularizedStep {
  ProductStep step;
  CutoffProfile cutoff = CutoffProfile::smooth_step(3);
  std::optional<WeightPoly> weight;

  bool trivial_weight() const { return !weight || weight->is_one(); }
};

struct RegularizedSpec {
  /// Processing order; steps.front() is the innermost factor and carries epsilon[0].
  std::vector<RegularizedStep> steps;
  TestForm testform;
  std::vector<double> epsilon;

  static RegularizedSpec uniform(const std::vector<ProductStep>& steps, const TestForm& phi, CutoffProfile cutoff,
                                 std::vector<double> epsilon = {});
  int n() const { return testform.n; }
  int q() const { return static_cast<int>(steps.size()); }
  bool reducible() const;
  /// Structural checks; epsilon entries are checked by the evaluators.
  void validate() const;
};

struct GridSpec {
  int gauss_order = 15;
  double max_panel_width = 1.0;
  /// Trapezoid points per angle on the full grid; 0 selects angular degree + 2.
  int angular_points = 0;
  double tol = 1e-9;
  /// Refinement also stops once successive levels differ by at most this much.
  double abs_tol = 1e-13;
  int max_level = 4;
  std::uint64_t budget = 2'000'000'000ULL;
  int threads = 1;
  /// Extent in u for variables whose integrand decays at least like e^{-u}.
  double decay_cutoff = 40.0;
};

struct LadderSample {
  std::vector<double> epsilon;
  Complex value;
  double uncertainty = 0.0;
};

struct NumericalResult {
  Complex value;
  double uncertainty = 0.0;
  int grid_level = 0;
  std::uint64_t evaluations = 0;
  bool budget_exceeded = false;
  bool no_convergence = false;
  std::vector<Complex> refinement_history;
  std::vector<std::vector<Complex>> extrapolation_table;
  std::vector<LadderSample> ladder;
};

/// One angularly selected term: constant * prod_i t_i^{K_i} rho_i(t_i) times the step factors.
struct ReducedTerm {
  Complex constant;
  std::vector<int> K;
};

/// Sum of radial integrals over (0,1)^n; RES steps contribute chi'(g_j) g_j and PV steps
/// chi(g_j), with g_j = prod_i t_i^{witness_ji} / eps_j.
struct ReducedIntegrand {
  int n = 0;
  std::vector<ReducedTerm> terms;
  std::vector<RadialProfile> profiles;
  std::vector<ProductStep::Kind> kinds;
  std::vector<std::vector<int>> witness;
  std::vector<CutoffProfile> cutoffs;

  bool is_zero() const { return terms.empty(); }
  std::string to_string() const;
};

ReducedIntegrand angular_reduce(const RegularizedSpec& spec);

/// Reduced path when weights are trivial, full tensor grid otherwise.
NumericalResult eval_regularized_integral(const RegularizedSpec& spec, const GridSpec& grid);
/// Always the tensor polar grid with explicit exterior algebra; rejects Indicator cutoffs.
NumericalResult eval_full_grid(const RegularizedSpec& spec, const GridSpec& grid);
/// Requires Indicator cutoffs on every RES step and trivial weights.
NumericalResult eval_tube_integral(const RegularizedSpec& spec, const GridSpec& grid);
/// The lambda-regularized integral of the same data at real lambda_j > 0.
NumericalResult eval_lambda_integral(const GammaSpec& spec, const std::vector<double>& lambda, const GridSpec& grid);

struct EpsilonSchedule {
  enum class Kind { Iterated, GeometricTower, Diagonal, Custom };
  Kind kind = Kind::Iterated;
  double beta = 2.0;
  std::vector<std::vector<double>> custom;

  static EpsilonSchedule iterated() { return {}; }
  static EpsilonSchedule tower(double beta) { return {Kind::GeometricTower, beta, {}}; }
  static EpsilonSchedule diagonal() { return {Kind::Diagonal, 2.0, {}}; }
  static EpsilonSchedule custom_list(std::vector<std::vector<double>> eps) {
    return {Kind::Custom, 2.0, std::move(eps)};
  }
};

struct ExtrapolationConfig {
  int ladder_points = 7;
  /// Every error power eps^{e/g} is eliminated this many times, absorbing log^{j} eps factors
  /// with j < log_multiplicity.
  int log_multiplicity = 2;
  /// First ladder value of eps^{1/g} for the outermost parameter (or delta), g as below. Small
  /// starts keep the higher powers that Richardson amplifies negligible.
  double start_root = 0.05;
  /// Inner ladders start at inner_gap * eps_outer^inner_power, so that the inner parameter is
  /// already in its asymptotic regime when the outer exponents differ.
  double inner_gap = 1e-2;
  double inner_power = 3.0;
};

/// Ladder ratio 2^{-g} with g the lcm of all witness entries; Richardson eliminates the powers
/// eps^{1/g}, eps^{2/g}, ... with their logarithmic companions.
NumericalResult iterated_limit_estimate(const RegularizedSpec& spec, const EpsilonSchedule& schedule,
                                        const ExtrapolationConfig& config, const GridSpec& grid);

struct RateFit {
  double C = 0.0;
  double omega = 0.0;
  double r2 = 0.0;
};

/// Least squares for log err = log C + omega log eps.
RateFit rate_fit(const std::vector<std::pair<double, double>>& samples);

}  // namespace residua
