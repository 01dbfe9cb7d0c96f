#include "residua/cfl.hpp"

#include <cstdio>
#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "residua/detail/regularization.hpp"
#include "residua/errors.hpp"
#include "residua/integrator.hpp"

namespace residua {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kTwoPi = 6.28318530717958647693;

std::size_t uz(int i) { return static_cast<std::size_t>(i); }

// Grassmann algebra on dxbar_i, dx_i (bits 0..2n-1) and the frame e_a (bits 2n + a); fixed
// capacity covers n <= 4, rank <= 3 since only dxbar and frame bits occur.
struct Super {
  static constexpr int kCapacity = 128;
  // Left uninitialized; entries below `size` are valid.
  std::array<std::uint32_t, kCapacity> mask;
  std::array<double, kCapacity> re;
  std::array<double, kCapacity> im;
  int size = 0;

  Complex coef(int i) const { return {re[uz(i)], im[uz(i)]}; }
  void add(std::uint32_t m, Complex v) {
    for (int i = 0; i < size; ++i) {
      if (mask[uz(i)] == m) {
        re[uz(i)] += v.real();
        im[uz(i)] += v.imag();
        return;
      }
    }
    mask[uz(size)] = m;
    re[uz(size)] = v.real();
    im[uz(size)] = v.imag();
    ++size;
  }
  void scale(Complex v) {
    for (int i = 0; i < size; ++i) {
      const Complex c = coef(i) * v;
      re[uz(i)] = c.real();
      im[uz(i)] = c.imag();
    }
  }
};

Super mul(const Super& a, const Super& b) {
  Super out;
  for (int i = 0; i < a.size; ++i) {
    for (int j = 0; j < b.size; ++j) {
      const int s = wedge_sign(a.mask[uz(i)], b.mask[uz(j)]);
      if (s != 0) out.add(a.mask[uz(i)] | b.mask[uz(j)], static_cast<double>(s) * a.coef(i) * b.coef(j));
    }
  }
  return out;
}

Complex to_cd(const Gaussian& g) {
  const auto z = g.to_complex();
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

double norm2(const VectorSection& f, const std::vector<Complex>& x) {
  double acc = 0.0;
  for (const auto& c : f.components) acc += std::norm(c.eval(x));
  return acc;
}

// log(|x^witness|^2 / eps) = ell + sum_i witness_i log |x_i|^2.
double log_argument(const std::vector<int>& witness, const std::vector<double>& log_t, double ell) {
  double L = ell;
  for (std::size_t i = 0; i < witness.size(); ++i) {
    if (witness[i] > 0) L += witness[i] * log_t[i];
  }
  return L;
}

Super factor_at(const CFLFactorSpec& spec, const std::vector<Complex>& x, const std::vector<double>& log_t,
                double ell) {
  const VectorSection& f = spec.section;
  const int n = f.n;
  const int e = f.rank();
  const double L = log_argument(f.support_witness, log_t, ell);

  Super value;
  if (spec.kind == CFLFactorSpec::Kind::R && spec.k == 0) {
    value.add(0, 1.0 - detail::chi_log(spec.cutoff, L));
  } else {
    const double f2 = norm2(f, x);
    if (f2 == 0.0) throw OnZeroSet("section vanishes at the evaluation point");
    Super s;
    Super ds;
    for (int a = 0; a < e; ++a) {
      const auto& comp = f.components[uz(a)];
      const std::uint32_t frame = std::uint32_t{1} << (2 * n + a);
      s.add(frame, std::conj(comp.eval(x)));
      for (int i = 0; i < n; ++i) {
        const Complex d = std::conj(comp.derivative(x, i));
        if (d != 0.0) ds.add((std::uint32_t{1} << (2 * i)) | frame, d);
      }
    }
    Super u = s;
    for (int k = 1; k < spec.k; ++k) u = mul(u, ds);
    const double scale = 1.0 / std::pow(f2, spec.k);
    if (spec.kind == CFLFactorSpec::Kind::U) {
      const double chi = detail::chi_log(spec.cutoff, L);
      u.scale(chi * scale);
      value = u;
    } else {
      if (spec.cutoff.kind == CutoffProfile::Kind::Indicator) {
        throw DerivativeOfIndicator("R factors need a smooth cutoff");
      }
      const double dchi = detail::dchi_log(spec.cutoff, L);
      if (dchi != 0.0) {
        Super dbar_chi;
        for (int i = 0; i < n; ++i) {
          const int g = f.support_witness[uz(i)];
          if (g > 0) dbar_chi.add(std::uint32_t{1} << (2 * i), dchi * static_cast<double>(g) / std::conj(x[uz(i)]));
        }
        value = mul(dbar_chi, u);
        value.scale(scale);
      }
    }
  }

  return value;
}

// Trapezoid points exceeding the largest angular frequency: the test form contributes its
// angular degree, u_k at most k times the section degree, dbar chi one more.
int angular_budget(const std::vector<CFLFactorSpec>& specs, const TestForm& phi) {
  int deg = phi.angular_degree();
  for (const auto& s : specs) {
    int d = 0;
    for (const auto& c : s.section.components) d = std::max(d, c.degree());
    deg += s.k * d + (s.kind == CFLFactorSpec::Kind::R && s.k > 0 ? 1 : 0);
  }
  return deg + 2;
}

}  // namespace

// ------------------------------------------------------------------ HoloPoly

HoloPoly HoloPoly::monomial(MultiIndex k, Complex c) {
  HoloPoly p;
  p.n = static_cast<int>(k.size());
  if (c != 0.0) p.coeff.emplace(std::move(k), c);
  return p;
}

HoloPoly HoloPoly::parse(const std::string& text, int n) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  }
  if (s.empty()) throw ParseError("empty polynomial");
  HoloPoly p;
  p.n = n;
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) { throw ParseError("polynomial '" + text + "': " + why); };
  auto read_int = [&]() {
    const std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) fail("expected an integer");
    return std::stoi(s.substr(start, pos - start));
  };
  while (pos < s.size()) {
    double sign = 1.0;
    if (s[pos] == '+' || s[pos] == '-') {
      sign = s[pos] == '-' ? -1.0 : 1.0;
      ++pos;
    } else if (pos != 0) {
      fail("expected '+' or '-'");
    }
    Complex c(sign, 0.0);
    MultiIndex k(uz(n), 0);
    bool first = true;
    while (true) {
      if (!first) {
        if (pos >= s.size() || s[pos] != '*') break;
        ++pos;
      }
      first = false;
      if (pos >= s.size()) fail("dangling operator");
      if (s[pos] == 'x') {
        ++pos;
        const int v = read_int();
        if (v < 1 || v > n) fail("variable index out of range");
        int e = 1;
        if (pos < s.size() && s[pos] == '^') {
          ++pos;
          e = read_int();
        }
        k[uz(v - 1)] += e;
      } else if (s[pos] == 'i') {
        ++pos;
        c *= Complex(0.0, 1.0);
      } else if (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.') {
        std::size_t used = 0;
        const double v = std::stod(s.substr(pos), &used);
        pos += used;
        c *= v;
      } else {
        fail(std::string("unexpected character '") + s[pos] + "'");
      }
    }
    auto it = p.coeff.find(k);
    if (it == p.coeff.end()) {
      if (c != 0.0) p.coeff.emplace(k, c);
    } else {
      it->second += c;
      if (it->second == 0.0) p.coeff.erase(it);
    }
  }
  return p;
}

int HoloPoly::degree() const {
  int d = 0;
  for (const auto& [k, c] : coeff) d = std::max(d, std::accumulate(k.begin(), k.end(), 0));
  return d;
}

Complex HoloPoly::eval(const std::vector<Complex>& x) const {
  Complex acc;
  for (const auto& [k, c] : coeff) {
    Complex m = c;
    for (int i = 0; i < n; ++i) {
      for (int e = 0; e < k[uz(i)]; ++e) m *= x[uz(i)];
    }
    acc += m;
  }
  return acc;
}

Complex HoloPoly::derivative(const std::vector<Complex>& x, int i) const {
  Complex acc;
  for (const auto& [k, c] : coeff) {
    if (k[uz(i)] == 0) continue;
    Complex m = c * static_cast<double>(k[uz(i)]);
    for (int j = 0; j < n; ++j) {
      const int e = k[uz(j)] - (j == i ? 1 : 0);
      for (int r = 0; r < e; ++r) m *= x[uz(j)];
    }
    acc += m;
  }
  return acc;
}

std::string HoloPoly::to_string() const {
  // Parseable by HoloPoly::parse; complex coefficients split into a real and an "i" term.
  if (coeff.empty()) return "0";
  std::string out;
  auto term = [&](double v, bool imag, const MultiIndex& k) {
    if (v == 0.0) return;
    out += out.empty() ? (v < 0 ? "-" : "") : (v < 0 ? " - " : " + ");
    std::string mono;
    for (int i = 0; i < n; ++i) {
      if (k[uz(i)] == 0) continue;
      mono += (mono.empty() ? "x" : "*x") + std::to_string(i + 1);
      if (k[uz(i)] > 1) mono += "^" + std::to_string(k[uz(i)]);
    }
    std::string factors;
    if (std::abs(v) != 1.0 || (mono.empty() && !imag)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", std::abs(v));
      factors = buf;
    }
    if (imag) factors += factors.empty() ? "i" : "*i";
    if (!mono.empty()) factors += factors.empty() ? mono : "*" + mono;
    out += factors;
  };
  for (const auto& [k, c] : coeff) {
    term(c.real(), false, k);
    term(c.imag(), true, k);
  }
  return out;
}

// ------------------------------------------------------------------ sections

VectorSection VectorSection::monomials(int n, const std::vector<MultiIndex>& exponents, std::vector<int> witness) {
  VectorSection f;
  f.n = n;
  for (const auto& k : exponents) f.components.push_back(HoloPoly::monomial(k));
  f.support_witness = std::move(witness);
  f.validate();
  return f;
}

bool VectorSection::monomial() const {
  return std::all_of(components.begin(), components.end(), [](const HoloPoly& p) { return p.coeff.size() == 1; });
}

void VectorSection::validate() const {
  if (n < 1) throw DimensionMismatch("section needs n >= 1");
  if (components.empty()) throw ZeroSection("section has no components");
  if (rank() > 3) throw RankTooLarge("sections of rank above 3 are not supported");
  if (static_cast<int>(support_witness.size()) != n) throw DimensionMismatch("support witness length differs from n");
  for (int g : support_witness) {
    if (g < 0) throw std::invalid_argument("support witness exponents must be nonnegative");
  }
  bool all_zero = true;
  for (const auto& c : components) {
    if (c.n != n) throw DimensionMismatch("component dimension differs from n");
    for (const auto& [k, v] : c.coeff) {
      if (static_cast<int>(k.size()) != n) throw DimensionMismatch("component exponent length differs from n");
    }
    all_zero = all_zero && c.is_zero();
  }
  if (all_zero) throw ZeroSection("all components vanish identically");
}

std::vector<Complex> minimal_section_eval(const VectorSection& f, const std::vector<Complex>& x) {
  if (static_cast<int>(x.size()) != f.n) throw DimensionMismatch("point dimension differs from n");
  std::vector<Complex> s;
  bool zero = true;
  for (const auto& c : f.components) {
    const Complex v = c.eval(x);
    zero = zero && v == 0.0;
    s.push_back(std::conj(v));
  }
  if (zero) throw ZeroSection("section vanishes at the evaluation point");
  return s;
}

// ------------------------------------------------------------------ factors

CFLFactorSpec CFLFactorSpec::U(VectorSection f, int k) {
  CFLFactorSpec s;
  s.section = std::move(f);
  s.k = k;
  s.kind = Kind::U;
  return s;
}

CFLFactorSpec CFLFactorSpec::R(VectorSection f, int k) {
  CFLFactorSpec s;
  s.section = std::move(f);
  s.k = k;
  s.kind = Kind::R;
  return s;
}

std::uint32_t CFLFactorSpec::component_mask() const {
  std::uint32_t m = 0;
  if (component.empty()) {
    for (int a = 0; a < k; ++a) m |= std::uint32_t{1} << a;
  } else {
    for (int a : component) m |= std::uint32_t{1} << a;
  }
  return m;
}

void CFLFactorSpec::validate() const {
  section.validate();
  const int e = section.rank();
  if (kind == Kind::U && (k < 1 || k > e)) throw std::invalid_argument("U factors need 1 <= k <= rank");
  if (kind == Kind::R && (k < 0 || k > e)) throw std::invalid_argument("R factors need 0 <= k <= rank");
  if (!component.empty()) {
    if (static_cast<int>(component.size()) != k) throw DimensionMismatch("component needs k frame indices");
    for (std::size_t a = 0; a < component.size(); ++a) {
      if (component[a] < 0 || component[a] >= e) throw DimensionMismatch("frame index out of range");
      if (a > 0 && component[a] <= component[a - 1]) throw std::invalid_argument("frame indices must ascend");
    }
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite and >= 0");
}

FrameForms cfl_factor_eval(const CFLFactorSpec& spec, const std::vector<Complex>& x) {
  spec.validate();
  if (static_cast<int>(x.size()) != spec.section.n) throw DimensionMismatch("point dimension differs from n");
  if (!(spec.epsilon > 0.0)) throw std::invalid_argument("factor evaluation needs epsilon > 0");
  std::vector<double> log_t;
  for (const auto& xi : x) log_t.push_back(std::log(std::norm(xi)));
  const Super value = factor_at(spec, x, log_t, -std::log(spec.epsilon));
  const int n = spec.section.n;
  const std::uint32_t form_bits = (std::uint32_t{1} << (2 * n)) - 1;
  FrameForms out;
  for (int i = 0; i < value.size; ++i) {
    const std::uint32_t m = value.mask[uz(i)];
    auto it = out.try_emplace(m >> (2 * n), Form(n)).first;
    it->second.set(m & form_bits, it->second.coeff(m & form_bits) + value.coef(i));
  }
  return out;
}

// ------------------------------------------------------------------ pairing

namespace {

NumericalResult pairing_at(const std::vector<CFLFactorSpec>& specs, const TestForm& phi,
                           const std::vector<double>& ell, const GridSpec& grid) {
  const int n = phi.n;
  const int q = static_cast<int>(specs.size());

  std::vector<Hyperplane> anchors;
  // Variables outside every witness support see a nonvanishing section and decay like e^{-u}.
  std::vector<double> upper(uz(n), grid.decay_cutoff);
  bool monomial = true;
  for (int j = 0; j < q; ++j) {
    const auto& s = specs[uz(j)];
    const auto& g = s.section.support_witness;
    monomial = monomial && s.section.monomial();
    if (std::any_of(g.begin(), g.end(), [](int v) { return v > 0; })) {
      std::vector<double> a(g.begin(), g.end());
      anchors.push_back({a, ell[uz(j)]});
      if (s.cutoff.kind == CutoffProfile::Kind::SmoothStep) anchors.push_back({a, ell[uz(j)] + kLog2});
      const bool vanishes_inside = !(s.kind == CFLFactorSpec::Kind::R && s.k == 0);
      for (int i = 0; vanishes_inside && i < n; ++i) {
        if (g[uz(i)] > 0) upper[uz(i)] = std::min(upper[uz(i)], (ell[uz(j)] + kLog2) / g[uz(i)]);
      }
    }
    // Crossings |x^a|^2 = |x^b|^2 between monomial components.
    const auto& comps = s.section.components;
    for (std::size_t a = 0; a < comps.size(); ++a) {
      for (std::size_t b = a + 1; b < comps.size(); ++b) {
        const MultiIndex* ka = comps[a].single_exponent();
        const MultiIndex* kb = comps[b].single_exponent();
        if (ka == nullptr || kb == nullptr) continue;
        std::vector<double> d(uz(n));
        bool nonzero = false;
        for (int i = 0; i < n; ++i) {
          d[uz(i)] = (*ka)[uz(i)] - (*kb)[uz(i)];
          nonzero = nonzero || d[uz(i)] != 0.0;
        }
        if (nonzero) anchors.push_back({d, 0.0});
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (phi.profiles[uz(i)].kind == RadialProfile::Kind::Plateau) {
      std::vector<double> a(uz(n), 0.0);
      a[uz(i)] = 1.0;
      anchors.push_back({a, kLog2});
    }
  }

  // dxbar_M ^ dx_1 ^ ... ^ dx_n = tail_sign * (basis monomial tail_mask).
  const std::uint32_t form_bits = (std::uint32_t{1} << (2 * n)) - 1;
  std::uint32_t tail_mask = 0;
  double tail_sign = 1.0;
  for (int i : phi.M) {
    tail_sign *= wedge_sign(tail_mask, std::uint32_t{1} << (2 * i));
    tail_mask |= std::uint32_t{1} << (2 * i);
  }
  for (int i = 0; i < n; ++i) {
    tail_sign *= wedge_sign(tail_mask, std::uint32_t{1} << (2 * i + 1));
    tail_mask |= std::uint32_t{1} << (2 * i + 1);
  }
  std::vector<std::pair<std::pair<MultiIndex, MultiIndex>, Complex>> coeffs;
  for (const auto& [km, c] : phi.coeff) coeffs.emplace_back(km, to_cd(c));
  std::vector<std::uint32_t> masks;
  for (const auto& s : specs) masks.push_back(s.component_mask());

  const int base_points = grid.angular_points > 0 ? grid.angular_points : angular_budget(specs, phi);
  auto make = [&](int level) {
    const int N = monomial ? base_points : base_points << level;
    std::vector<Complex> roots;
    for (int k = 0; k < N; ++k) roots.push_back(std::polar(1.0, kTwoPi * k / N));
    return NestedIntegrator::Integrand([&, N, roots](const std::vector<double>& u) -> Complex {
      std::vector<double> r(uz(n));
      double rho = 1.0;
      Complex measure(1.0, 0.0);
      for (int i = 0; i < n; ++i) {
        const double t = std::exp(-u[uz(i)]);
        r[uz(i)] = std::sqrt(t);
        rho *= profile_eval(phi.profiles[uz(i)], t);
        measure *= kAreaFactor * 0.5 * t;
      }
      if (rho == 0.0) return {};
      long total = 1;
      for (int i = 0; i < n; ++i) total *= N;
      std::vector<Complex> terms;
      terms.reserve(static_cast<std::size_t>(total));
      std::vector<Complex> x(uz(n));
      std::vector<double> log_t(uz(n));
      for (int i = 0; i < n; ++i) log_t[uz(i)] = -u[uz(i)];
      for (long idx = 0; idx < total; ++idx) {
        long rest = idx;
        for (int i = 0; i < n; ++i) {
          x[uz(i)] = r[uz(i)] * roots[static_cast<std::size_t>(rest % N)];
          rest /= N;
        }
        // Product of the selected components, frame bits stripped.
        Super omega;
        omega.add(0, 1.0);
        for (int j = q; j-- > 0;) {
          const auto& s = specs[uz(j)];
          if (!(s.kind == CFLFactorSpec::Kind::R && s.k == 0) && norm2(s.section, x) == 0.0) {
            omega.size = 0;
            break;
          }
          const Super full = factor_at(s, x, log_t, ell[uz(j)]);
          Super part;
          for (int i = 0; i < full.size; ++i) {
            if ((full.mask[uz(i)] >> (2 * n)) == masks[uz(j)]) part.add(full.mask[uz(i)] & form_bits, full.coef(i));
          }
          omega = mul(omega, part);
          if (omega.size == 0) break;
        }
        Complex top;
        for (int i = 0; i < omega.size; ++i) {
          const std::uint32_t m = omega.mask[uz(i)];
          if ((m | tail_mask) == form_bits) top += static_cast<double>(wedge_sign(m, tail_mask)) * omega.coef(i);
        }
        if (top == 0.0) {
          terms.emplace_back();
          continue;
        }
        Complex poly;
        for (const auto& [km, c] : coeffs) {
          Complex mono = c;
          for (int i = 0; i < n; ++i) {
            for (int e = 0; e < km.first[uz(i)]; ++e) mono *= x[uz(i)];
            for (int e = 0; e < km.second[uz(i)]; ++e) mono *= std::conj(x[uz(i)]);
          }
          poly += mono;
        }
        terms.push_back(top * tail_sign * poly);
      }
      double cell = rho;
      for (int i = 0; i < n; ++i) cell *= kTwoPi / N;
      return pairwise_sum(terms) * cell * measure;
    });
  };
  NestedIntegrator integ(upper, anchors);
  const double growth = std::pow(2.0, n) * (monomial ? 1.0 : std::pow(2.0, n));
  return detail::refine(integ, make, growth, grid, true);
}

// Expansions in eps run over powers eps^{p/g}, where g collects the witness entries and the
// determinants of n-subsets of the cutoff and component-crossing normals.
int ladder_root(const std::vector<CFLFactorSpec>& specs, int n) {
  int g = 1;
  std::vector<std::vector<long>> normals;
  for (const auto& s : specs) {
    const auto& w = s.section.support_witness;
    for (int v : w) {
      if (v > 0) g = std::lcm(g, v);
    }
    if (std::any_of(w.begin(), w.end(), [](int v) { return v > 0; })) normals.emplace_back(w.begin(), w.end());
    const auto& comps = s.section.components;
    for (std::size_t a = 0; a < comps.size(); ++a) {
      for (std::size_t b = a + 1; b < comps.size(); ++b) {
        const MultiIndex* ka = comps[a].single_exponent();
        const MultiIndex* kb = comps[b].single_exponent();
        if (ka == nullptr || kb == nullptr) continue;
        std::vector<long> d(uz(n));
        for (int i = 0; i < n; ++i) d[uz(i)] = (*ka)[uz(i)] - (*kb)[uz(i)];
        if (std::any_of(d.begin(), d.end(), [](long v) { return v != 0; })) normals.push_back(d);
      }
    }
  }
  // n <= 2 here.
  for (std::size_t a = 0; a < normals.size(); ++a) {
    if (n == 1) continue;
    for (std::size_t b = a + 1; b < normals.size(); ++b) {
      const long det = std::abs(normals[a][0] * normals[b][1] - normals[a][1] * normals[b][0]);
      if (det > 0) g = std::lcm(g, static_cast<int>(det));
    }
  }
  return g;
}

void check_product(const std::vector<CFLFactorSpec>& specs, const TestForm& phi) {
  if (specs.empty()) throw EmptyProduct("CFL product needs at least one factor");
  phi.validate();
  if (phi.n > 2) throw DimensionMismatch("CFL pairing supports n <= 2");
  int degree = static_cast<int>(phi.M.size());
  for (const auto& s : specs) {
    if (s.section.n != phi.n) throw DimensionMismatch("section and test form dimensions differ");
    if (s.kind == CFLFactorSpec::Kind::R && s.k > 0 && s.cutoff.kind == CutoffProfile::Kind::Indicator) {
      throw DerivativeOfIndicator("R factors need a smooth cutoff");
    }
    degree += s.form_degree();
  }
  if (degree != phi.n) throw DegreeMismatch("total antiholomorphic degree differs from n");
}

}  // namespace

NumericalResult cfl_pairing(const std::vector<CFLFactorSpec>& specs, const TestForm& phi, const GridSpec& grid) {
  for (const auto& s : specs) s.validate();
  check_product(specs, phi);
  std::vector<double> eps;
  for (const auto& s : specs) eps.push_back(s.epsilon);
  return pairing_at(specs, phi, detail::logs_from_epsilon(eps, static_cast<int>(specs.size())), grid);
}

NumericalResult cfl_product_eval(const std::vector<CFLFactorSpec>& specs, const TestForm& phi,
                                 const EpsilonSchedule& schedule, const ExtrapolationConfig& config,
                                 const GridSpec& grid) {
  for (auto s : specs) {
    s.epsilon = 0.0;
    s.validate();
  }
  check_product(specs, phi);
  int g = std::min(ladder_root(specs, phi.n), 12);
  return detail::ladder_limit(
      static_cast<int>(specs.size()), g,
      [&](const std::vector<double>& ell) { return pairing_at(specs, phi, ell, grid); }, schedule, config);
}

}  // namespace residua
