#pragma once

// Nested piecewise Gauss-Legendre integration over a box prod_i [0, upper_i] whose integrand is
// smooth away from a known set of hyperplanes. Coordinate 0 is the outermost integral.

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace residua {

using Complex = std::complex<double>;

/// a . u = c.
struct Hyperplane {
  std::vector<double> a;
  double c = 0.0;
};

struct PanelRule {
  /// One of 7, 10, 15, 20, 25, 30.
  int gauss_order = 15;
  double max_width = 1.0;
  /// Every piece is split into ceil(width / max_width) * 2^level panels.
  int level = 0;
  /// The piece ending at the box face gets panels of doubling width instead; for integrands
  /// decaying there at least like e^{-u}.
  bool graded_tail = false;
};

/// Nodes and weights on [-1, 1].
const std::vector<std::pair<double, double>>& gauss_legendre(int order);

/// Ordered pairwise-tree sum; the result depends only on the order of the input.
Complex pairwise_sum(const std::vector<Complex>& v);

class NestedIntegrator {
 public:
  using Integrand = std::function<Complex(const std::vector<double>&)>;

  NestedIntegrator(std::vector<double> upper, std::vector<Hyperplane> anchors);

  int dim() const { return static_cast<int>(upper_.size()); }

  /// Splitting points in u_d for fixed u_0..u_{d-1}: u_d-coordinates of the vertices of the
  /// anchor arrangement (box faces included) restricted to the remaining coordinates.
  std::vector<double> breakpoints(int d, const std::vector<double>& prefix) const;

  /// The top-level nodes are evaluated by `threads` workers; the reduction is ordered.
  Complex integrate(const Integrand& f, const PanelRule& rule, int threads, std::uint64_t* evaluations) const;

 private:
  Complex integrate_level(const Integrand& f, const PanelRule& rule, int d, std::vector<double>& u,
                          std::uint64_t& evals) const;
  std::vector<std::pair<double, double>> nodes(int d, const std::vector<double>& prefix, const PanelRule& rule) const;

  std::vector<double> upper_;
  std::vector<Hyperplane> planes_;
};

}  // namespace residua
