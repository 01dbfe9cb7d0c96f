#include "residua/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "residua/errors.hpp"
#include "residua/detail/regularization.hpp"
#include "residua/integrator.hpp"

namespace residua {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kTwoPi = 6.28318530717958647693;

std::size_t uz(int i) { return static_cast<std::size_t>(i); }

Complex to_cd(const Gaussian& g) {
  const auto z = g.to_complex();
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

Complex two_pi_i_pow(int n) {
  Complex out(1.0, 0.0);
  for (int i = 0; i < n; ++i) out *= Complex(0.0, kTwoPi);
  return out;
}

// chi(v) with log v = x; v >= 1 gives 1 and v <= 1/2 gives 0 for both cutoff kinds.
double chi_log(const CutoffProfile& chi, double x) {
  if (x >= 0.0) return 1.0;
  if (chi.kind == CutoffProfile::Kind::Indicator || x <= -kLog2) return 0.0;
  return cutoff_eval(chi, std::exp(x), 0);
}

// chi'(v) v with log v = x.
double dchi_log(const CutoffProfile& chi, double x) {
  if (x >= 0.0 || x <= -kLog2) return 0.0;
  const double v = std::exp(x);
  return cutoff_eval(chi, v, 1) * v;
}

std::vector<double> logs_from_epsilon(const std::vector<double>& eps, int q) {
  if (static_cast<int>(eps.size()) != q) throw DimensionMismatch("one epsilon per step required");
  std::vector<double> ell;
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("epsilon entries must be positive and finite");
    ell.push_back(-std::log(e));
  }
  return ell;
}

// Angular selection shared by the reduced, tube and lambda paths.
struct Selection {
  std::vector<ReducedTerm> terms;
  std::vector<int> res_steps;
};

Selection select_terms(const std::vector<ProductStep>& steps, const TestForm& phi) {
  const int n = phi.n;
  const int q = static_cast<int>(steps.size());
  Selection sel;
  std::vector<int> G(uz(n), 0);
  for (int j = 0; j < q; ++j) {
    const auto& s = steps[uz(j)];
    for (int i = 0; i < n; ++i) G[uz(i)] += s.gamma[uz(i)];
    if (s.kind == ProductStep::Kind::RES) sel.res_steps.push_back(j);
  }
  std::vector<int> C;
  std::vector<bool> in_C(uz(n), false);
  for (int i = 0; i < n; ++i) {
    if (!std::binary_search(phi.M.begin(), phi.M.end(), i)) {
      C.push_back(i);
      in_C[uz(i)] = true;
    }
  }
  if (C.size() != sel.res_steps.size()) return sel;
  double A = 0.0;
  std::vector<int> perm = C;
  do {
    double w = 1.0;
    for (std::size_t a = 0; a < sel.res_steps.size(); ++a) {
      w *= steps[uz(sel.res_steps[a])].regularizer()[uz(perm[a])];
    }
    if (w == 0.0) continue;
    std::vector<int> dbar_order;
    for (std::size_t a = sel.res_steps.size(); a-- > 0;) dbar_order.push_back(perm[a]);
    A += w * orientation_sign(n, dbar_order, phi.M);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (A == 0.0) return sel;
  const Complex base = A * two_pi_i_pow(n);
  for (const auto& [km, c] : phi.coeff) {
    const auto& [k, m] = km;
    ReducedTerm t;
    t.constant = to_cd(c) * base;
    bool selected = true;
    for (int i = 0; i < n; ++i) {
      const int e = in_C[uz(i)] ? 1 : 0;
      if (k[uz(i)] - G[uz(i)] != m[uz(i)] - e) {
        selected = false;
        break;
      }
      t.K.push_back(m[uz(i)] - e);
    }
    if (selected) sel.terms.push_back(std::move(t));
  }
  return sel;
}

// sum_T c_T prod_i t_i^{K_i + 1} rho_i(t_i) at t = e^{-u}: the radial integrand times dt = t du.
Complex radial_part(const std::vector<ReducedTerm>& terms, const std::vector<RadialProfile>& profiles,
                    const std::vector<double>& u) {
  const std::size_t n = u.size();
  double rho = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    rho *= profile_eval(profiles[i], std::exp(-u[i]));
    if (rho == 0.0) return {};
  }
  Complex acc;
  for (const auto& t : terms) {
    double expo = 0.0;
    for (std::size_t i = 0; i < n; ++i) expo -= (t.K[i] + 1) * u[i];
    acc += t.constant * std::exp(expo);
  }
  return acc * rho;
}

double dot(const std::vector<int>& g, const std::vector<double>& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += g[i] * u[i];
  return s;
}

int min_shift(const std::vector<ReducedTerm>& terms, int i) {
  int m = 1 << 20;
  for (const auto& t : terms) m = std::min(m, t.K[uz(i)] + 1);
  return m;
}

bool has_plateau(const std::vector<RadialProfile>& profiles) {
  return std::any_of(profiles.begin(), profiles.end(),
                     [](const RadialProfile& r) { return r.kind == RadialProfile::Kind::Plateau; });
}

// Doubles the panel count until the relative change drops below tol or the budget runs out.
NumericalResult refine(const NestedIntegrator& integ, const std::function<NestedIntegrator::Integrand(int)>& make,
                       double growth, const GridSpec& grid, bool graded_tail = false) {
  NumericalResult r;
  std::uint64_t last_cost = 0;
  for (int level = 0; level <= grid.max_level; ++level) {
    if (level > 0 && r.evaluations + static_cast<std::uint64_t>(static_cast<double>(last_cost) * growth) > grid.budget) {
      r.budget_exceeded = true;
      break;
    }
    PanelRule rule{grid.gauss_order, grid.max_panel_width, level, graded_tail};
    std::uint64_t evals = 0;
    const Complex v = integ.integrate(make(level), rule, grid.threads, &evals);
    r.evaluations += evals;
    last_cost = evals;
    r.refinement_history.push_back(v);
    r.value = v;
    r.grid_level = level;
    if (level > 0) {
      const double diff = std::abs(v - r.refinement_history[r.refinement_history.size() - 2]);
      r.uncertainty = diff;
      if (diff <= std::max(grid.tol * std::abs(v), grid.abs_tol)) break;
    }
  }
  if (r.refinement_history.size() == 1) r.uncertainty = std::abs(r.value);
  return r;
}

NumericalResult zero_result() {
  NumericalResult r;
  r.refinement_history.push_back({});
  return r;
}

// Reduced evaluation at ell = -log eps; RES steps with Indicator cutoffs become point constraints.
NumericalResult eval_reduced(const RegularizedSpec& spec, const std::vector<double>& ell, const GridSpec& grid) {
  const int n = spec.n();
  const int q = spec.q();
  std::vector<ProductStep> steps;
  for (const auto& s : spec.steps) steps.push_back(s.step);
  const Selection sel = select_terms(steps, spec.testform);
  if (sel.terms.empty()) return zero_result();
  const auto& profiles = spec.testform.profiles;

  std::vector<int> delta;
  for (int j : sel.res_steps) {
    if (spec.steps[uz(j)].cutoff.kind == CutoffProfile::Kind::Indicator) delta.push_back(j);
  }
  const int p = static_cast<int>(delta.size());

  // Eliminated variables S: the lexicographically first p-subset with the largest |det|.
  std::vector<int> S;
  double best = 0.0;
  {
    std::vector<bool> pick(uz(n), false);
    std::fill(pick.begin(), pick.begin() + p, true);
    do {
      std::vector<int> cand;
      for (int i = 0; i < n; ++i) {
        if (pick[uz(i)]) cand.push_back(i);
      }
      Eigen::MatrixXd B(p, p);
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) B(a, b) = steps[uz(delta[uz(a)])].regularizer()[uz(cand[uz(b)])];
      }
      const double det = p == 0 ? 1.0 : std::abs(B.determinant());
      if (det > best + 1e-12) {
        best = det;
        S = cand;
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  if (best == 0.0) return zero_result();

  std::vector<int> F;
  for (int i = 0; i < n; ++i) {
    if (std::find(S.begin(), S.end(), i) == S.end()) F.push_back(i);
  }
  const int nf = static_cast<int>(F.size());

  // u_S = p0 + P u_F.
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(p, nf);
  if (p > 0) {
    Eigen::MatrixXd B(p, p);
    Eigen::MatrixXd BF(p, nf);
    Eigen::VectorXd rhs(p);
    for (int a = 0; a < p; ++a) {
      const auto& g = steps[uz(delta[uz(a)])].regularizer();
      for (int b = 0; b < p; ++b) B(a, b) = g[uz(S[uz(b)])];
      for (int b = 0; b < nf; ++b) BF(a, b) = g[uz(F[uz(b)])];
      rhs(a) = ell[uz(delta[uz(a)])];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    p0 = lu.solve(rhs);
    P = -lu.solve(BF);
  }
  const double jacobian = 1.0 / best;

  // Affine expression of a full-space linear form in u_F.
  auto restrict = [&](const std::vector<double>& a, double c) {
    Hyperplane h{std::vector<double>(uz(nf), 0.0), c};
    for (int b = 0; b < nf; ++b) h.a[uz(b)] = a[uz(F[uz(b)])];
    for (int s = 0; s < p; ++s) {
      const double as = a[uz(S[uz(s)])];
      if (as == 0.0) continue;
      h.c -= as * p0(s);
      for (int b = 0; b < nf; ++b) h.a[uz(b)] += as * P(s, b);
    }
    return h;
  };

  std::vector<Hyperplane> anchors;
  for (int j = 0; j < q; ++j) {
    if (std::find(delta.begin(), delta.end(), j) != delta.end()) continue;
    const auto& g = steps[uz(j)].regularizer();
    std::vector<double> a(g.begin(), g.end());
    anchors.push_back(restrict(a, ell[uz(j)]));
    if (spec.steps[uz(j)].cutoff.kind == CutoffProfile::Kind::SmoothStep) {
      anchors.push_back(restrict(a, ell[uz(j)] + kLog2));
    }
  }
  for (int s = 0; s < p; ++s) {
    std::vector<double> a(uz(n), 0.0);
    a[uz(S[uz(s)])] = 1.0;
    anchors.push_back(restrict(a, 0.0));
  }
  if (has_plateau(profiles)) {
    for (int i = 0; i < n; ++i) {
      std::vector<double> a(uz(n), 0.0);
      a[uz(i)] = 1.0;
      anchors.push_back(restrict(a, kLog2));
    }
  }
  for (auto& h : anchors) {
    if (std::all_of(h.a.begin(), h.a.end(), [](double x) { return x == 0.0; })) h.a.clear();
  }
  anchors.erase(std::remove_if(anchors.begin(), anchors.end(), [](const Hyperplane& h) { return h.a.empty(); }),
                anchors.end());

  std::vector<double> upper;
  for (int i : F) {
    double U = min_shift(sel.terms, i) >= 1 ? grid.decay_cutoff : std::numeric_limits<double>::infinity();
    for (int j = 0; j < q; ++j) {
      const int g = steps[uz(j)].regularizer()[uz(i)];
      if (g > 0) U = std::min(U, (ell[uz(j)] + kLog2) / g);
    }
    if (!std::isfinite(U)) U = grid.decay_cutoff;
    upper.push_back(std::max(U, 0.0));
  }

  NestedIntegrator integ(upper, anchors);
  auto integrand = [&, jacobian](const std::vector<double>& uf) -> Complex {
    std::vector<double> u(uz(n), 0.0);
    for (int b = 0; b < nf; ++b) u[uz(F[uz(b)])] = uf[uz(b)];
    for (int s = 0; s < p; ++s) {
      double v = p0(s);
      for (int b = 0; b < nf; ++b) v += P(s, b) * uf[uz(b)];
      if (v < 0.0) return {};
      u[uz(S[uz(s)])] = v;
    }
    double factor = jacobian;
    for (int j = 0; j < q && factor != 0.0; ++j) {
      const auto& st = spec.steps[uz(j)];
      if (st.step.kind == ProductStep::Kind::RES && st.cutoff.kind == CutoffProfile::Kind::Indicator) continue;
      const double x = ell[uz(j)] - dot(st.step.regularizer(), u);
      factor *= st.step.kind == ProductStep::Kind::RES ? dchi_log(st.cutoff, x) : chi_log(st.cutoff, x);
    }
    if (factor == 0.0) return {};
    return factor * radial_part(sel.terms, profiles, u);
  };
  return refine(
      integ, [&](int) { return NestedIntegrator::Integrand(integrand); }, std::pow(2.0, nf), grid);
}

// Tensor polar grid: trapezoid in every angle, nested Gauss in every u_i = -log |x_i|^2.
NumericalResult eval_full(const RegularizedSpec& spec, const std::vector<double>& ell, const GridSpec& grid) {
  const int n = spec.n();
  const int q = spec.q();
  const TestForm& phi = spec.testform;
  for (const auto& s : spec.steps) {
    if (s.cutoff.kind == CutoffProfile::Kind::Indicator) {
      throw NotReducible("Indicator cutoffs are only evaluated on the angular-reduced path");
    }
  }
  std::vector<WeightPoly> weights;
  std::vector<std::pair<double, double>> wb;
  bool radial = true;
  int weight_degree = 0;
  for (const auto& s : spec.steps) {
    weights.push_back(s.weight ? *s.weight : WeightPoly::one(n));
    wb.push_back(weights.back().bounds());
    radial = radial && weights.back().is_radial();
    weight_degree = std::max(weight_degree, weights.back().angular_degree());
  }

  int degree = phi.angular_degree() + 1;
  for (int i = 0; i < n; ++i) {
    int g = 0;
    for (const auto& s : spec.steps) g += s.step.gamma[uz(i)];
    degree = std::max(degree, phi.angular_degree() + g + 1);
  }
  const int base_points = grid.angular_points > 0 ? grid.angular_points : degree + 2 + (radial ? 0 : 2 * weight_degree + 2);

  std::vector<Hyperplane> anchors;
  for (int j = 0; j < q; ++j) {
    const auto& g = spec.steps[uz(j)].step.regularizer();
    std::vector<double> a(g.begin(), g.end());
    anchors.push_back({a, ell[uz(j)] + std::log(wb[uz(j)].first)});
    anchors.push_back({a, ell[uz(j)] + kLog2 + std::log(wb[uz(j)].second)});
    if (!weights[uz(j)].is_one()) {
      anchors.push_back({a, ell[uz(j)]});
      anchors.push_back({a, ell[uz(j)] + kLog2});
    }
  }
  if (has_plateau(phi.profiles)) {
    for (int i = 0; i < n; ++i) {
      std::vector<double> a(uz(n), 0.0);
      a[uz(i)] = 1.0;
      anchors.push_back({a, kLog2});
    }
  }
  std::vector<double> upper;
  for (int i = 0; i < n; ++i) {
    double U = 2.0 * grid.decay_cutoff;
    for (int j = 0; j < q; ++j) {
      const int g = spec.steps[uz(j)].step.regularizer()[uz(i)];
      if (g > 0) U = std::min(U, (ell[uz(j)] + kLog2 + std::log(wb[uz(j)].second)) / g);
    }
    upper.push_back(std::max(U, 0.0));
  }

  std::vector<int> res_steps;
  for (int j = 0; j < q; ++j) {
    if (spec.steps[uz(j)].step.kind == ProductStep::Kind::RES) res_steps.push_back(j);
  }
  // dxbar_M ^ dx_1 ^ ... ^ dx_n.
  Form tail = Form::scalar(n, 1.0);
  for (int i : phi.M) tail = wedge(tail, Form::dxbar(n, i));
  for (int i = 0; i < n; ++i) tail = wedge(tail, Form::dx(n, i));

  std::vector<std::pair<std::pair<MultiIndex, MultiIndex>, Complex>> coeffs;
  for (const auto& [km, c] : phi.coeff) coeffs.emplace_back(km, to_cd(c));

  auto make = [&](int level) {
    const int N = radial ? base_points : base_points << level;
    return NestedIntegrator::Integrand([&, N](const std::vector<double>& u) -> Complex {
      std::vector<double> t(uz(n));
      std::vector<double> r(uz(n));
      double rho = 1.0;
      for (int i = 0; i < n; ++i) {
        t[uz(i)] = std::exp(-u[uz(i)]);
        r[uz(i)] = std::exp(-0.5 * u[uz(i)]);
        rho *= profile_eval(phi.profiles[uz(i)], t[uz(i)]);
      }
      if (rho == 0.0) return {};
      Complex measure(1.0, 0.0);
      for (int i = 0; i < n; ++i) measure *= kAreaFactor * 0.5 * t[uz(i)];

      std::vector<Complex> x(uz(n));
      std::vector<Complex> terms;
      long total = 1;
      for (int i = 0; i < n; ++i) total *= N;
      terms.reserve(uz(static_cast<int>(total)));
      for (long idx = 0; idx < total; ++idx) {
        long rest = idx;
        for (int i = 0; i < n; ++i) {
          const double theta = kTwoPi * static_cast<double>(rest % N) / N;
          rest /= N;
          x[uz(i)] = std::polar(r[uz(i)], theta);
        }
        Complex scalar(rho, 0.0);
        Form omega = Form::scalar(n, 1.0);
        bool dead = false;
        std::vector<Form> res_forms(res_steps.size(), Form(n));
        for (int j = 0; j < q && !dead; ++j) {
          const auto& st = spec.steps[uz(j)];
          const auto& g = st.step.regularizer();
          const double w = weights[uz(j)].eval(x);
          const double lx = ell[uz(j)] - dot(g, u) + std::log(w);
          Complex inv(1.0, 0.0);
          for (int i = 0; i < n; ++i) {
            for (int e = 0; e < st.step.gamma[uz(i)]; ++e) inv /= x[uz(i)];
          }
          if (st.step.kind == ProductStep::Kind::PV) {
            const double c = chi_log(st.cutoff, lx);
            if (c == 0.0) dead = true;
            scalar *= c * inv;
            continue;
          }
          const double c = dchi_log(st.cutoff, lx);
          if (c == 0.0) {
            dead = true;
            continue;
          }
          scalar *= c * inv;
          Form one(n);
          for (int i = 0; i < n; ++i) {
            Complex a = weights[uz(j)].dbar(x, i) / w;
            if (g[uz(i)] > 0) a += static_cast<double>(g[uz(i)]) / std::conj(x[uz(i)]);
            one.set(std::uint32_t{1} << (2 * i), a);
          }
          const auto pos = std::find(res_steps.begin(), res_steps.end(), j) - res_steps.begin();
          res_forms[static_cast<std::size_t>(pos)] = one;
        }
        if (dead) {
          terms.emplace_back();
          continue;
        }
        for (std::size_t a = res_forms.size(); a-- > 0;) omega = wedge(omega, res_forms[a]);
        const Complex top = wedge(omega, tail).top();
        Complex poly;
        for (const auto& [km, c] : coeffs) {
          Complex mono = c;
          for (int i = 0; i < n; ++i) {
            for (int e = 0; e < km.first[uz(i)]; ++e) mono *= x[uz(i)];
            for (int e = 0; e < km.second[uz(i)]; ++e) mono *= std::conj(x[uz(i)]);
          }
          poly += mono;
        }
        terms.push_back(top * scalar * poly);
      }
      double cell = 1.0;
      for (int i = 0; i < n; ++i) cell *= kTwoPi / N;
      return pairwise_sum(terms) * cell * measure;
    });
  };
  NestedIntegrator integ(upper, anchors);
  const double growth = std::pow(2.0, n) * (radial ? 1.0 : std::pow(2.0, n));
  return refine(integ, make, growth, grid);
}

NumericalResult evaluate_logs(const RegularizedSpec& spec, const std::vector<double>& ell, const GridSpec& grid) {
  if (spec.reducible()) return eval_reduced(spec, ell, grid);
  return eval_full(spec, ell, grid);
}

int witness_lcm(const RegularizedSpec& spec) {
  int g = 1;
  for (const auto& s : spec.steps) {
    for (int e : s.step.regularizer()) {
      if (e > 0) g = std::lcm(g, e);
    }
  }
  return std::min(g, 12);
}

// Richardson table for samples at eps_0 r^k. Column m removes the error power (r^{1/g})^{e_m} =
// 2^{-e_m}, each e = 1, 2, ... repeated `multiplicity` times to absorb eps^{e/g} log^j eps terms.
std::vector<std::vector<Complex>> richardson(const std::vector<Complex>& T, int multiplicity) {
  std::vector<std::vector<Complex>> table{T};
  for (std::size_t m = 1; m < T.size(); ++m) {
    const int e = static_cast<int>(m - 1) / multiplicity + 1;
    const double f = std::ldexp(1.0, -e);
    const auto& prev = table.back();
    std::vector<Complex> row;
    for (std::size_t k = 1; k < prev.size(); ++k) row.push_back((prev[k] - f * prev[k - 1]) / (1.0 - f));
    table.push_back(std::move(row));
  }
  return table;
}

// Sum of |weights| of the final extrapolant in terms of the samples.
double richardson_gain(std::size_t L, int multiplicity) {
  double gain = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    std::vector<Complex> e(L, 0.0);
    e[k] = 1.0;
    gain += std::abs(richardson(e, multiplicity).back().back());
  }
  return gain;
}

NumericalResult extrapolate(const std::vector<LadderSample>& samples, std::uint64_t evals, bool budget, int multiplicity) {
  NumericalResult r;
  std::vector<Complex> T;
  double inner = 0.0;
  for (const auto& s : samples) {
    T.push_back(s.value);
    inner = std::max(inner, s.uncertainty);
  }
  r.extrapolation_table = richardson(T, multiplicity);
  r.ladder = samples;
  r.evaluations = evals;
  r.budget_exceeded = budget;
  const auto& tab = r.extrapolation_table;
  r.value = tab.back().back();
  const std::size_t L = tab.size();
  double jump = L >= 2 ? std::abs(tab[L - 1].back() - tab[L - 2].back()) : std::abs(r.value);
  r.uncertainty = jump + richardson_gain(L, multiplicity) * inner;
  if (L >= 3) {
    const double prev = std::abs(tab[L - 2].back() - tab[L - 3].back());
    double scale = 0.0;
    for (const auto& v : T) scale = std::max(scale, std::abs(v));
    const double floor = std::max(1e-10 * scale, 10.0 * richardson_gain(L, multiplicity) * inner);
    if (jump > std::max(prev, floor)) r.no_convergence = true;
  }
  return r;
}

NumericalResult iterate_level(const detail::LogEvaluator& eval, int j, std::vector<double>& ell, double start_log,
                              int g, const ExtrapolationConfig& cfg) {
  std::vector<LadderSample> samples;
  std::uint64_t evals = 0;
  bool budget = false;
  bool nonconv = false;
  int level = 0;
  const double step = g * kLog2;
  const double gap = -std::log(cfg.inner_gap);
  for (int k = 0; k < cfg.ladder_points; ++k) {
    ell[uz(j)] = start_log + step * k;
    NumericalResult v = j == 0 ? eval(ell) : iterate_level(eval, j - 1, ell, cfg.inner_power * ell[uz(j)] + gap, g, cfg);
    evals += v.evaluations;
    budget = budget || v.budget_exceeded;
    nonconv = nonconv || v.no_convergence;
    level = std::max(level, v.grid_level);
    LadderSample s;
    for (double l : ell) s.epsilon.push_back(std::exp(-l));
    s.value = v.value;
    s.uncertainty = v.uncertainty;
    samples.push_back(std::move(s));
  }
  NumericalResult r = extrapolate(samples, evals, budget, cfg.log_multiplicity);
  r.no_convergence = r.no_convergence || nonconv;
  r.grid_level = level;
  return r;
}

}  // namespace

// ------------------------------------------------------------------ WeightPoly

WeightPoly WeightPoly::one(int n) {
  WeightPoly w;
  w.n = n;
  w.add(MultiIndex(uz(n), 0), MultiIndex(uz(n), 0), 1.0);
  return w;
}

WeightPoly WeightPoly::radial_quadratic(int n, double a) {
  WeightPoly w = one(n);
  for (int i = 0; i < n; ++i) {
    MultiIndex e(uz(n), 0);
    e[uz(i)] = 1;
    w.add(e, e, a);
  }
  return w;
}

void WeightPoly::add(MultiIndex k, MultiIndex m, double c) {
  if (static_cast<int>(k.size()) != n || static_cast<int>(m.size()) != n) {
    throw DimensionMismatch("weight multi-index length differs from n");
  }
  auto key = std::make_pair(std::move(k), std::move(m));
  coeff[key] += c;
  if (coeff[key] == 0.0) coeff.erase(key);
}

bool WeightPoly::is_one() const {
  if (coeff.size() != 1) return false;
  const auto& [km, c] = *coeff.begin();
  return c == 1.0 && std::all_of(km.first.begin(), km.first.end(), [](int e) { return e == 0; }) &&
         std::all_of(km.second.begin(), km.second.end(), [](int e) { return e == 0; });
}

bool WeightPoly::is_radial() const {
  return std::all_of(coeff.begin(), coeff.end(), [](const auto& kv) { return kv.first.first == kv.first.second; });
}

int WeightPoly::angular_degree() const {
  int d = 0;
  for (const auto& [km, c] : coeff) {
    for (int i = 0; i < n; ++i) d = std::max(d, std::abs(km.first[uz(i)] - km.second[uz(i)]));
  }
  return d;
}

double WeightPoly::eval(const std::vector<Complex>& x) const {
  Complex acc;
  for (const auto& [km, c] : coeff) {
    Complex mono(c, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int e = 0; e < km.first[uz(i)]; ++e) mono *= x[uz(i)];
      for (int e = 0; e < km.second[uz(i)]; ++e) mono *= std::conj(x[uz(i)]);
    }
    acc += mono;
  }
  return acc.real();
}

Complex WeightPoly::dbar(const std::vector<Complex>& x, int i) const {
  Complex acc;
  for (const auto& [km, c] : coeff) {
    const int mi = km.second[uz(i)];
    if (mi == 0) continue;
    Complex mono(c * mi, 0.0);
    for (int l = 0; l < n; ++l) {
      for (int e = 0; e < km.first[uz(l)]; ++e) mono *= x[uz(l)];
      const int me = km.second[uz(l)] - (l == i ? 1 : 0);
      for (int e = 0; e < me; ++e) mono *= std::conj(x[uz(l)]);
    }
    acc += mono;
  }
  return acc;
}

std::pair<double, double> WeightPoly::bounds(std::uint64_t seed) const {
  double constant = 0.0;
  double positive = 0.0;
  double negative = 0.0;
  double spread = 0.0;
  for (const auto& [km, c] : coeff) {
    const auto mirrored = coeff.find({km.second, km.first});
    if (mirrored == coeff.end() || mirrored->second != c) throw std::invalid_argument("weight polynomial is not real");
    const bool is_const = std::all_of(km.first.begin(), km.first.end(), [](int e) { return e == 0; }) &&
                          std::all_of(km.second.begin(), km.second.end(), [](int e) { return e == 0; });
    if (is_const) {
      constant += c;
    } else if (km.first == km.second) {
      // |x^k|^2 ranges over [0, 1].
      (c > 0.0 ? positive : negative) += c;
    } else {
      spread += std::abs(c);
    }
  }
  const double upper = constant + positive + spread;
  const double lower = constant + negative - spread;
  if (lower > 0.0) return {lower, upper};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double sampled = std::numeric_limits<double>::infinity();
  std::vector<Complex> x(uz(n));
  for (int s = 0; s < 4096; ++s) {
    for (int i = 0; i < n; ++i) {
      const double rad = s % 4 == 0 ? 1.0 : std::sqrt(unit(rng));
      x[uz(i)] = std::polar(rad, kTwoPi * unit(rng));
    }
    sampled = std::min(sampled, eval(x));
  }
  if (!(sampled > 0.0)) throw NonPositiveWeight("weight is not positive on the closed unit polydisc");
  return {0.5 * sampled, upper};
}

// ------------------------------------------------------------------ specs

RegularizedSpec RegularizedSpec::uniform(const std::vector<ProductStep>& steps, const TestForm& phi,
                                         CutoffProfile cutoff, std::vector<double> epsilon) {
  RegularizedSpec s;
  for (const auto& st : steps) s.steps.push_back({st, cutoff, std::nullopt});
  s.testform = phi;
  s.epsilon = std::move(epsilon);
  return s;
}

bool RegularizedSpec::reducible() const {
  return std::all_of(steps.begin(), steps.end(), [](const RegularizedStep& s) { return s.trivial_weight(); });
}

void RegularizedSpec::validate() const {
  testform.validate();
  if (steps.empty()) throw EmptyProduct("regularized integral needs at least one step");
  if (n() > 4) throw std::invalid_argument("quadrature supports n <= 4");
  for (const auto& s : steps) {
    s.step.validate(n());
    if (s.weight) {
      if (s.weight->n != n()) throw DimensionMismatch("weight lives on a different C^n");
      (void)s.weight->bounds();
    }
  }
}

// ------------------------------------------------------------------ reduction

ReducedIntegrand angular_reduce(const RegularizedSpec& spec) {
  spec.validate();
  if (!spec.reducible()) throw NotReducible("nontrivial weights break the angular selection rule");
  std::vector<ProductStep> steps;
  for (const auto& s : spec.steps) steps.push_back(s.step);
  ReducedIntegrand r;
  r.n = spec.n();
  r.terms = select_terms(steps, spec.testform).terms;
  r.profiles = spec.testform.profiles;
  for (const auto& s : spec.steps) {
    r.kinds.push_back(s.step.kind);
    r.witness.push_back(s.step.regularizer());
    r.cutoffs.push_back(s.cutoff);
  }
  return r;
}

std::string ReducedIntegrand::to_string() const {
  if (terms.empty()) return "0";
  std::ostringstream out;
  out.precision(12);
  for (std::size_t a = 0; a < terms.size(); ++a) {
    const auto& t = terms[a];
    if (a) out << " + ";
    out << "(" << t.constant.real() << (t.constant.imag() < 0 ? " - " : " + ") << std::abs(t.constant.imag())
        << " i) * ∫ ";
    for (int i = 0; i < n; ++i) {
      const std::string ti = "t" + std::to_string(i + 1);
      if (t.K[uz(i)] != 0) out << ti << "^" << t.K[uz(i)] << " ";
      out << "rho" << i + 1 << "(" << ti << ") ";
    }
    for (std::size_t j = 0; j < kinds.size(); ++j) {
      const std::string gj = "g" + std::to_string(j + 1);
      out << (kinds[j] == ProductStep::Kind::RES ? "chi'(" + gj + ")" + gj : "chi(" + gj + ")") << " ";
    }
    out << "dt";
  }
  for (std::size_t j = 0; j < witness.size(); ++j) {
    out << (j ? ", " : "; ") << "g" << j + 1 << " = ";
    bool first = true;
    for (int i = 0; i < n; ++i) {
      const int e = witness[j][uz(i)];
      if (e == 0) continue;
      out << (first ? "" : "*") << "t" << i + 1;
      if (e > 1) out << "^" << e;
      first = false;
    }
    out << "/eps" << j + 1;
  }
  return out.str();
}

// ------------------------------------------------------------------ evaluators

NumericalResult eval_regularized_integral(const RegularizedSpec& spec, const GridSpec& grid) {
  spec.validate();
  return evaluate_logs(spec, logs_from_epsilon(spec.epsilon, spec.q()), grid);
}

NumericalResult eval_full_grid(const RegularizedSpec& spec, const GridSpec& grid) {
  spec.validate();
  return eval_full(spec, logs_from_epsilon(spec.epsilon, spec.q()), grid);
}

NumericalResult eval_tube_integral(const RegularizedSpec& spec, const GridSpec& grid) {
  spec.validate();
  if (!spec.reducible()) throw NotReducible("tube integrals need trivial weights");
  for (const auto& s : spec.steps) {
    if (s.step.kind == ProductStep::Kind::RES && s.cutoff.kind != CutoffProfile::Kind::Indicator) {
      throw std::invalid_argument("tube integral needs Indicator cutoffs on residue steps");
    }
  }
  return eval_reduced(spec, logs_from_epsilon(spec.epsilon, spec.q()), grid);
}

NumericalResult eval_lambda_integral(const GammaSpec& spec, const std::vector<double>& lambda, const GridSpec& grid) {
  const TestForm& phi = spec.testform;
  phi.validate();
  const int n = phi.n;
  const int q = static_cast<int>(spec.steps.size());
  if (q == 0) throw EmptyProduct("lambda integral needs at least one step");
  if (static_cast<int>(lambda.size()) != q) throw DimensionMismatch("one lambda per step required");
  for (const auto& s : spec.steps) s.validate(n);
  const Selection sel = select_terms(spec.steps, phi);
  if (sel.terms.empty()) return zero_result();

  std::vector<double> upper;
  double narrowest = grid.max_panel_width;
  for (int i = 0; i < n; ++i) {
    double rate = min_shift(sel.terms, i);
    for (int j = 0; j < q; ++j) rate += lambda[uz(j)] * spec.steps[uz(j)].regularizer()[uz(i)];
    if (!(rate > 0.0)) throw std::invalid_argument("lambda integral diverges: no decay in some variable");
    upper.push_back(grid.decay_cutoff / rate);
    narrowest = std::min(narrowest, upper.back() / 8.0);
  }
  std::vector<Hyperplane> anchors;
  if (has_plateau(phi.profiles)) {
    for (int i = 0; i < n; ++i) {
      std::vector<double> a(uz(n), 0.0);
      a[uz(i)] = 1.0;
      anchors.push_back({a, kLog2});
    }
  }
  auto integrand = [&](const std::vector<double>& u) -> Complex {
    double factor = 1.0;
    for (int j = 0; j < q; ++j) {
      const auto& st = spec.steps[uz(j)];
      factor *= std::exp(-lambda[uz(j)] * dot(st.regularizer(), u));
      if (st.kind == ProductStep::Kind::RES) factor *= lambda[uz(j)];
    }
    return factor * radial_part(sel.terms, phi.profiles, u);
  };
  GridSpec g = grid;
  g.max_panel_width = narrowest;
  NestedIntegrator integ(upper, anchors);
  return refine(
      integ, [&](int) { return NestedIntegrator::Integrand(integrand); }, std::pow(2.0, n), g);
}

// ------------------------------------------------------------------ limits

NumericalResult iterated_limit_estimate(const RegularizedSpec& spec, const EpsilonSchedule& schedule,
                                        const ExtrapolationConfig& config, const GridSpec& grid) {
  spec.validate();
  return detail::ladder_limit(
      spec.q(), witness_lcm(spec), [&](const std::vector<double>& ell) { return evaluate_logs(spec, ell, grid); },
      schedule, config);
}

namespace detail {

double chi_log(const CutoffProfile& chi, double x) { return residua::chi_log(chi, x); }
double dchi_log(const CutoffProfile& chi, double x) { return residua::dchi_log(chi, x); }
std::vector<double> logs_from_epsilon(const std::vector<double>& eps, int q) {
  return residua::logs_from_epsilon(eps, q);
}
NumericalResult refine(const NestedIntegrator& integ, const std::function<NestedIntegrator::Integrand(int)>& make,
                       double growth, const GridSpec& grid, bool graded_tail) {
  return residua::refine(integ, make, growth, grid, graded_tail);
}

NumericalResult ladder_limit(int q, int g, const LogEvaluator& eval, const EpsilonSchedule& schedule,
                             const ExtrapolationConfig& config) {
  if (config.ladder_points < 2) throw std::invalid_argument("ladder needs at least two points");
  if (!(config.start_root > 0.0 && config.start_root < 1.0) || !(config.inner_gap > 0.0 && config.inner_gap <= 1.0)) {
    throw std::invalid_argument("ladder start and gap must lie in (0, 1)");
  }
  if (!(config.inner_power >= 1.0)) throw std::invalid_argument("inner ladder power must be >= 1");
  std::vector<double> ell(uz(q), 0.0);

  switch (schedule.kind) {
    case EpsilonSchedule::Kind::Iterated:
      return iterate_level(eval, q - 1, ell, -g * std::log(config.start_root), g, config);
    case EpsilonSchedule::Kind::GeometricTower:
    case EpsilonSchedule::Kind::Diagonal: {
      if (schedule.kind == EpsilonSchedule::Kind::GeometricTower && !(schedule.beta > 1.0)) {
        throw std::invalid_argument("tower base must exceed 1");
      }
      std::vector<LadderSample> samples;
      std::uint64_t evals = 0;
      bool budget = false;
      bool nonconv = false;
      int level = 0;
      for (int k = 0; k < config.ladder_points; ++k) {
        const double log_delta = -g * std::log(config.start_root) + g * kLog2 * k;
        for (int j = 0; j < q; ++j) {
          ell[uz(j)] = schedule.kind == EpsilonSchedule::Kind::Diagonal
                           ? log_delta
                           : log_delta * std::pow(schedule.beta, q - 1 - j);
        }
        NumericalResult v = eval(ell);
        evals += v.evaluations;
        budget = budget || v.budget_exceeded;
        nonconv = nonconv || v.no_convergence;
        level = std::max(level, v.grid_level);
        LadderSample s;
        for (double l : ell) s.epsilon.push_back(std::exp(-l));
        s.value = v.value;
        s.uncertainty = v.uncertainty;
        samples.push_back(std::move(s));
      }
      NumericalResult r = extrapolate(samples, evals, budget, config.log_multiplicity);
      r.no_convergence = r.no_convergence || nonconv;
      r.grid_level = level;
      return r;
    }
    case EpsilonSchedule::Kind::Custom: {
      if (schedule.custom.empty()) throw std::invalid_argument("custom schedule is empty");
      NumericalResult r;
      for (const auto& eps : schedule.custom) {
        NumericalResult v = eval(logs_from_epsilon(eps, q));
        r.evaluations += v.evaluations;
        r.budget_exceeded = r.budget_exceeded || v.budget_exceeded;
        r.ladder.push_back({eps, v.value, v.uncertainty});
        r.grid_level = std::max(r.grid_level, v.grid_level);
      }
      r.value = r.ladder.back().value;
      r.uncertainty = r.ladder.back().uncertainty;
      if (r.ladder.size() >= 2) r.uncertainty += std::abs(r.value - r.ladder[r.ladder.size() - 2].value);
      return r;
    }
  }
  return {};
}

}  // namespace detail

RateFit rate_fit(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 4) throw DegenerateFit("rate fit needs at least 4 samples");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [eps, err] : samples) {
    if (!(eps > 0.0) || !(err > 0.0) || !std::isfinite(eps) || !std::isfinite(err)) {
      throw DegenerateFit("rate fit needs positive finite epsilons and errors");
    }
    x.push_back(std::log(eps));
    y.push_back(std::log(err));
  }
  const double nx = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nx;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nx;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 1e-300) throw DegenerateFit("epsilon samples are all equal");
  if (syy <= 1e-24 * std::max(1.0, my * my)) throw DegenerateFit("errors are constant; no power law to fit");
  RateFit f;
  f.omega = sxy / sxx;
  f.C = std::exp(my - f.omega * mx);
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (my + f.omega * (x[i] - mx));
    ssr += r * r;
  }
  f.r2 = 1.0 - ssr / syy;
  return f;
}

}  // namespace residua
