#include "residua/integrator.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

namespace residua {

namespace {

template <unsigned N>
std::vector<std::pair<double, double>> expand_rule() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      out.emplace_back(0.0, w[i]);
    } else {
      out.emplace_back(-x[i], w[i]);
      out.emplace_back(x[i], w[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Calls f on every size-k subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(int n, int k, F&& f) {
  if (k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j) - 1] + 1;
  }
}

}  // namespace

const std::vector<std::pair<double, double>>& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  std::vector<std::pair<double, double>> rule;
  switch (order) {
    case 7: rule = expand_rule<7>(); break;
    case 10: rule = expand_rule<10>(); break;
    case 15: rule = expand_rule<15>(); break;
    case 20: rule = expand_rule<20>(); break;
    case 25: rule = expand_rule<25>(); break;
    case 30: rule = expand_rule<30>(); break;
    default: throw std::invalid_argument("Gauss order must be one of 7, 10, 15, 20, 25, 30");
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

Complex pairwise_sum(const std::vector<Complex>& v) {
  if (v.empty()) return {};
  std::vector<Complex> level = v;
  while (level.size() > 1) {
    std::vector<Complex> next((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next[i / 2] = level[i] + level[i + 1];
    if (level.size() % 2 == 1) next.back() = level.back();
    level.swap(next);
  }
  return level.front();
}

NestedIntegrator::NestedIntegrator(std::vector<double> upper, std::vector<Hyperplane> anchors)
    : upper_(std::move(upper)) {
  const int n = dim();
  for (auto& h : anchors) {
    if (static_cast<int>(h.a.size()) != n) throw std::invalid_argument("anchor hyperplane dimension mismatch");
    planes_.push_back(std::move(h));
  }
  for (int i = 0; i < n; ++i) {
    if (!(upper_[static_cast<std::size_t>(i)] >= 0.0)) throw std::invalid_argument("box upper bound must be >= 0");
    Hyperplane lo{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0};
    lo.a[static_cast<std::size_t>(i)] = 1.0;
    Hyperplane hi = lo;
    hi.c = upper_[static_cast<std::size_t>(i)];
    planes_.push_back(lo);
    planes_.push_back(hi);
  }
}

std::vector<double> NestedIntegrator::breakpoints(int d, const std::vector<double>& prefix) const {
  const int n = dim();
  const int m = n - d;
  const double hi = upper_[static_cast<std::size_t>(d)];
  std::vector<double> pts{0.0, hi};

  // Restrict every plane to the free coordinates u_d..u_{n-1}.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (const auto& h : planes_) {
    Eigen::VectorXd r(m);
    double c = h.c;
    for (int k = 0; k < d; ++k) c -= h.a[static_cast<std::size_t>(k)] * prefix[static_cast<std::size_t>(k)];
    bool nonzero = false;
    for (int k = 0; k < m; ++k) {
      r(k) = h.a[static_cast<std::size_t>(d + k)];
      nonzero = nonzero || r(k) != 0.0;
    }
    if (!nonzero) continue;
    rows.push_back(r);
    rhs.push_back(c);
  }

  for_each_subset(static_cast<int>(rows.size()), m, [&](const std::vector<int>& idx) {
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
      A.row(r) = rows[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])].transpose();
      b(r) = rhs[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < m) return;
    const double x = lu.solve(b)(0);
    if (std::isfinite(x) && x > 0.0 && x < hi) pts.push_back(x);
  });

  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  const double merge = 1e-12 * std::max(1.0, hi);
  for (double p : pts) {
    if (out.empty() || p - out.back() > merge) out.push_back(p);
  }
  return out;
}

std::vector<std::pair<double, double>> NestedIntegrator::nodes(int d, const std::vector<double>& prefix,
                                                               const PanelRule& rule) const {
  const auto& gl = gauss_legendre(rule.gauss_order);
  const auto bp = breakpoints(d, prefix);
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k];
    const double b = bp[k + 1];
    if (rule.graded_tail && k + 2 == bp.size() && b - a > rule.max_width) {
      double w = std::ldexp(rule.max_width, -rule.level);
      for (double lo = a; lo < b; w *= 2.0) {
        const double hi = std::min(b, lo + w);
        for (const auto& [x, wt] : gl) out.emplace_back(lo + 0.5 * (hi - lo) * (x + 1.0), 0.5 * (hi - lo) * wt);
        lo = hi;
      }
      continue;
    }
    const auto base = static_cast<long>(std::max(1.0, std::ceil((b - a) / rule.max_width)));
    const long panels = base << rule.level;
    const double h = (b - a) / static_cast<double>(panels);
    for (long p = 0; p < panels; ++p) {
      const double lo = a + h * static_cast<double>(p);
      for (const auto& [x, w] : gl) out.emplace_back(lo + 0.5 * h * (x + 1.0), 0.5 * h * w);
    }
  }
  return out;
}

Complex NestedIntegrator::integrate_level(const Integrand& f, const PanelRule& rule, int d, std::vector<double>& u,
                                          std::uint64_t& evals) const {
  if (d == dim()) {
    ++evals;
    return f(u);
  }
  const auto pts = nodes(d, u, rule);
  std::vector<Complex> terms;
  terms.reserve(pts.size());
  for (const auto& [x, w] : pts) {
    u[static_cast<std::size_t>(d)] = x;
    terms.push_back(w * integrate_level(f, rule, d + 1, u, evals));
  }
  u[static_cast<std::size_t>(d)] = 0.0;
  return pairwise_sum(terms);
}

Complex NestedIntegrator::integrate(const Integrand& f, const PanelRule& rule, int threads,
                                    std::uint64_t* evaluations) const {
  const int n = dim();
  if (n == 0) {
    if (evaluations) *evaluations += 1;
    return f({});
  }
  const auto pts = nodes(0, {}, rule);
  std::vector<Complex> terms(pts.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(pts.size())));
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(workers), 0);
  auto work = [&](int id) {
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = static_cast<std::size_t>(id); k < pts.size(); k += static_cast<std::size_t>(workers)) {
      u[0] = pts[k].first;
      terms[k] = pts[k].second * integrate_level(f, rule, 1, u, counts[static_cast<std::size_t>(id)]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int id = 0; id < workers; ++id) pool.emplace_back(work, id);
    for (auto& t : pool) t.join();
  }
  if (evaluations) {
    for (auto c : counts) *evaluations += c;
  }
  return pairwise_sum(terms);
}

}  // namespace residua
