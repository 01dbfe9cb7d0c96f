#pragma once

// Shared machinery of the epsilon-regularized engines: cutoffs in log coordinates, grid
// refinement and the ladder/extrapolation drivers.

#include <functional>
#include <vector>

#include "residua/integrator.hpp"
#include "residua/quadrature.hpp"

namespace residua::detail {

/// chi(v) with log v = x.
double chi_log(const CutoffProfile& chi, double x);
/// chi'(v) v with log v = x.
double dchi_log(const CutoffProfile& chi, double x);
/// -log eps per entry; throws on non-positive or non-finite entries.
std::vector<double> logs_from_epsilon(const std::vector<double>& eps, int q);

/// Evaluates on levels 0, 1, ... until successive values agree, the level cap or the budget.
/// `growth` predicts the cost ratio between consecutive levels.
NumericalResult refine(const NestedIntegrator& integ, const std::function<NestedIntegrator::Integrand(int)>& make,
                       double growth, const GridSpec& grid, bool graded_tail = false);

/// Regularized value at ell_j = -log eps_j.
using LogEvaluator = std::function<NumericalResult(const std::vector<double>& ell)>;

/// Limit along `schedule` for q regularization parameters whose cutoff arguments are powers of
/// monomials with exponent entries dividing g.
NumericalResult ladder_limit(int q, int g, const LogEvaluator& eval, const EpsilonSchedule& schedule,
                             const ExtrapolationConfig& config);

}  // namespace residua::detail
