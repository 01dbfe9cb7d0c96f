#include "residua/mellin.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <set>

namespace residua {

namespace {

Rational pow_int(const Rational& base, int e) {
  if (e >= 0) return rational_pow(base, e);
  return Rational(1) / rational_pow(base, -e);
}

ExactScalar scale(const ExactScalar& x, const Rational& r) { return x * ExactScalar(Gaussian(r)); }

std::string product_key(const MellinProduct& p) {
  std::string key = std::to_string(p.scalar.s()) + "|";
  for (int m : p.lambda_monomial) key += std::to_string(m) + ",";
  for (const auto& f : p.factors) key += "|" + to_string(f.form) + "#" + to_string(f.rat);
  return key;
}

/// Rational in [1/13, 97] with a seeded engine.
Rational random_rational(std::mt19937_64& rng, bool allow_negative) {
  std::uniform_int_distribution<int> num(1, 97);
  std::uniform_int_distribution<int> den(1, 13);
  Rational r(num(rng), den(rng));
  r.canonicalize();
  if (allow_negative && (rng() & 1U)) r = -r;
  return r;
}

/// Products of lambda-polynomials are exact for orders < precision.
std::map<int, ScalarSum> expand_series(const MellinExpr& e, const std::vector<Poly>& lam, int precision) {
  std::map<int, ScalarSum> out;
  for (const auto& p : e.products()) {
    Poly mono = Poly::constant(1);
    for (size_t j = 0; j < p.lambda_monomial.size(); ++j) {
      for (int r = 0; r < p.lambda_monomial[j]; ++r) mono = mono * lam[j];
    }
    if (mono.is_zero()) continue;
    std::vector<Poly> args;
    int val = mono.valuation();
    bool vanishes = false;
    for (const auto& f : p.factors) {
      Poly arg = Poly::constant(Rational(f.form.constant));
      for (size_t j = 0; j < f.form.coeffs.size(); ++j) {
        if (f.form.coeffs[j] != 0) arg = arg + lam[j] * Rational(f.form.coeffs[j]);
      }
      const int ord = f.rat.composed_order(arg);
      if (ord == std::numeric_limits<int>::max()) vanishes = true;
      if (vanishes) break;
      val += ord;
      args.push_back(std::move(arg));
    }
    if (vanishes || val >= precision) continue;
    const int rel = precision - val;
    LaurentSeries s = LaurentSeries::from_poly(mono, mono.valuation() + rel);
    s.strip();
    for (size_t f = 0; f < args.size(); ++f) {
      const int ord = p.factors[f].rat.composed_order(args[f]);
      s = s * p.factors[f].rat.compose_series(args[f], ord + rel);
    }
    for (int o = val; o < precision; ++o) {
      const Rational c = s.at(o);
      if (sgn(c) != 0) out[o] += scale(p.scalar, c);
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  }
  return out;
}

/// True when the expression vanishes identically: exact at 3 random pole-free points.
bool probes_zero(const MellinExpr& e, std::mt19937_64& rng) {
  if (e.is_zero()) return true;
  int hits = 0;
  for (int attempt = 0; attempt < 64 && hits < 3; ++attempt) {
    std::vector<Rational> pt;
    for (int j = 0; j < e.vars(); ++j) pt.push_back(random_rational(rng, false));
    auto v = eval_at_point(e, pt);
    if (auto* s = std::get_if<ScalarSum>(&v)) {
      if (!s->is_zero()) return false;
      ++hits;
    }
  }
  if (hits < 3) throw std::logic_error("probe points kept hitting poles");
  return true;
}

/// Expansion of one product in lambda_v; returns coefficients of orders <= 0.
void expand_product_in(const MellinProduct& p, int v, std::map<int, MellinExpr>& by_order, int q) {
  const auto vu = static_cast<size_t>(v);
  struct Mixed {
    Rational c;
    AffineForm rest;
    UniRat rat;
  };
  std::vector<MellinFactor> passive;
  std::vector<std::pair<long, UniRat>> pure_in;
  std::vector<Mixed> mixed;
  for (const auto& f : p.factors) {
    const long c = f.form.coeffs[vu];
    if (c == 0) {
      passive.push_back(f);
      continue;
    }
    bool only_v = true;
    for (size_t j = 0; j < f.form.coeffs.size(); ++j) {
      if (j != vu && f.form.coeffs[j] != 0) only_v = false;
    }
    if (only_v) {
      pure_in.emplace_back(c, f.rat.shifted(Rational(f.form.constant)));
    } else {
      AffineForm rest = f.form;
      rest.coeffs[vu] = 0;
      mixed.push_back({Rational(c), std::move(rest), f.rat});
    }
  }

  int val = p.lambda_monomial[vu];
  for (const auto& [c, r] : pure_in) val += unirat_limit_at_zero(r).order;
  if (val > 0) return;
  const int D = -val;

  // Pure factors: r(c * lambda_v) = sum_o a_o c^o lambda_v^o.
  LaurentSeries S{p.lambda_monomial[vu], {Rational(1)}};
  S.coef.resize(static_cast<size_t>(D) + 1, Rational(0));
  for (const auto& [c, r] : pure_in) {
    LaurentSeries ls = r.laurent_at_zero(D + 1);
    for (size_t i = 0; i < ls.coef.size(); ++i) ls.coef[i] *= pow_int(Rational(c), ls.val + static_cast<int>(i));
    S = S * ls;
  }

  // Taylor coefficients c^k/k! r^{(k)} of the mixed factors.
  std::vector<std::vector<UniRat>> derivs(mixed.size());
  for (size_t f = 0; f < mixed.size(); ++f) {
    derivs[f].push_back(mixed[f].rat);
    for (int k = 1; k <= D; ++k) derivs[f].push_back(derivs[f].back().derivative());
  }

  MellinProduct base;
  base.lambda_monomial = p.lambda_monomial;
  base.lambda_monomial[vu] = 0;
  std::vector<int> ks(mixed.size(), 0);
  std::function<void(size_t, int, int, const Rational&)> distribute = [&](size_t f, int left, int order,
                                                                        const Rational& weight) {
    if (f == mixed.size()) {
      if (left != 0) return;
      MellinProduct out = base;
      out.scalar = scale(p.scalar, weight);
      out.factors = passive;
      for (size_t g = 0; g < mixed.size(); ++g) {
        out.factors.push_back({mixed[g].rest, derivs[g][static_cast<size_t>(ks[g])]});
      }
      auto it = by_order.find(order);
      if (it == by_order.end()) it = by_order.emplace(order, MellinExpr(q)).first;
      it->second.add(std::move(out));
      return;
    }
    for (int k = 0; k <= left; ++k) {
      ks[f] = k;
      distribute(f + 1, left - k, order, weight * pow_int(mixed[f].c, k) / factorial(k));
    }
    ks[f] = 0;
  };

  for (int o = val; o <= 0; ++o) {
    const int r = o - val;
    for (int s = 0; s <= r; ++s) {
      const Rational a = S.at(S.val + s);
      if (sgn(a) == 0) continue;
      distribute(0, r - s, o, a);
    }
  }
}

/// Linear part divided by the gcd of its coefficients.
AffineForm primitive(AffineForm f) {
  f.constant = 0;
  long g = 0;
  for (long c : f.coeffs) g = std::gcd(g, c);
  if (g != 0) {
    for (auto& c : f.coeffs) c /= g;
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------- MellinExpr

void MellinExpr::add(MellinProduct p) {
  if (p.scalar.is_zero()) return;
  if (static_cast<int>(p.lambda_monomial.size()) != q_) throw DimensionMismatch("lambda monomial length differs from q");
  // lambda_1 first in rendering and iteration.
  auto descending = [](const AffineForm& a, const AffineForm& b) { return b < a; };
  std::map<AffineForm, UniRat, decltype(descending)> merged(descending);
  Rational folded(1);
  for (auto& f : p.factors) {
    if (f.form.vars() != q_) throw DimensionMismatch("affine form length differs from q");
    if (f.form.is_constant()) {
      auto v = f.rat.eval(Rational(f.form.constant));
      if (!v) throw std::domain_error("constant factor sits on a pole");
      folded *= *v;
      continue;
    }
    auto it = merged.find(f.form);
    if (it == merged.end()) {
      merged.emplace(f.form, std::move(f.rat));
    } else {
      it->second = it->second * f.rat;
    }
  }
  p.factors.clear();
  for (auto& [form, rat] : merged) {
    if (rat.is_zero()) return;
    // lambda_j against a root of rat(c * lambda_j): lambda_j / (c lambda_j) = 1/c.
    size_t only = form.coeffs.size();
    int nonzero = 0;
    for (size_t j = 0; j < form.coeffs.size(); ++j) {
      if (form.coeffs[j] != 0) {
        only = j;
        ++nonzero;
      }
    }
    if (nonzero == 1) {
      const Rational root = -Rational(form.constant);
      while (p.lambda_monomial[only] > 0) {
        auto sh = rat.shifts();
        auto hit = std::find(sh.begin(), sh.end(), root);
        if (hit == sh.end()) break;
        sh.erase(hit);
        rat = UniRat(rat.numerator(), std::move(sh));
        folded /= Rational(form.coeffs[only]);
        --p.lambda_monomial[only];
      }
    }
    if (rat.is_constant()) {
      folded *= rat.numerator().coeff(0);
      continue;
    }
    p.factors.push_back({form, std::move(rat)});
  }
  if (sgn(folded) == 0) return;
  p.scalar = scale(p.scalar, folded);

  const std::string key = product_key(p);
  auto it = std::find_if(products_.begin(), products_.end(), [&](const MellinProduct& x) { return product_key(x) == key; });
  if (it == products_.end()) {
    products_.push_back(std::move(p));
    return;
  }
  auto sum = try_add(it->scalar, p.scalar);
  if (!sum) throw std::logic_error("mixed powers of 2*pi*i under one product key");
  if (sum->is_zero()) {
    products_.erase(it);
  } else {
    it->scalar = *sum;
  }
}

void MellinExpr::validate() const {
  for (const auto& p : products_) {
    if (static_cast<int>(p.lambda_monomial.size()) != q_) throw DimensionMismatch("dangling lambda monomial");
    for (const auto& f : p.factors) {
      if (f.form.vars() != q_) throw DimensionMismatch("dangling affine form");
    }
  }
}

// ---------------------------------------------------------------- build

MellinExpr build_gamma(const GammaSpec& spec) {
  const TestForm& phi = spec.testform;
  phi.validate();
  const int n = phi.n;
  const int q = static_cast<int>(spec.steps.size());
  if (q == 0) throw EmptyProduct("Mellin integral needs at least one step");
  for (const auto& s : spec.steps) s.validate(n);
  for (const auto& rho : phi.profiles) {
    if (rho.kind != RadialProfile::Kind::Beta) throw NonBetaProfile("Mellin moments are rational only for Beta profiles");
  }

  std::vector<int> G(static_cast<size_t>(n), 0);
  std::vector<AffineForm> ell(static_cast<size_t>(n), AffineForm::zero(q));
  std::vector<int> res_steps;
  std::vector<int> mono(static_cast<size_t>(q), 0);
  for (int j = 0; j < q; ++j) {
    const auto& s = spec.steps[static_cast<size_t>(j)];
    for (int i = 0; i < n; ++i) {
      G[static_cast<size_t>(i)] += s.gamma[static_cast<size_t>(i)];
      ell[static_cast<size_t>(i)].coeffs[static_cast<size_t>(j)] = s.regularizer()[static_cast<size_t>(i)];
    }
    if (s.kind == ProductStep::Kind::RES) {
      res_steps.push_back(j);
      mono[static_cast<size_t>(j)] = 1;
    }
  }

  std::vector<int> C;
  std::vector<bool> in_C(static_cast<size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    if (!std::binary_search(phi.M.begin(), phi.M.end(), i)) {
      C.push_back(i);
      in_C[static_cast<size_t>(i)] = true;
    }
  }
  MellinExpr out(q);
  if (C.size() != res_steps.size()) return out;

  // Sum of sign * prod gamma~ over bijections RES steps -> C; the radial factors depend only on C.
  Rational assignment_weight(0);
  std::vector<int> perm = C;
  do {
    Rational w(1);
    std::vector<int> dbar_order;
    for (size_t a = 0; a < res_steps.size(); ++a) {
      w *= spec.steps[static_cast<size_t>(res_steps[a])].regularizer()[static_cast<size_t>(perm[a])];
    }
    if (sgn(w) == 0) continue;
    for (size_t a = res_steps.size(); a-- > 0;) dbar_order.push_back(perm[a]);
    assignment_weight += w * orientation_sign(n, dbar_order, phi.M);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (sgn(assignment_weight) == 0) return out;

  for (const auto& [km, c] : phi.coeff) {
    const auto& [k, m] = km;
    MellinProduct p;
    p.scalar = ExactScalar(c * Gaussian(assignment_weight), n);
    p.lambda_monomial = mono;
    bool selected = true;
    for (int i = 0; i < n && selected; ++i) {
      const auto iu = static_cast<size_t>(i);
      const int e = in_C[iu] ? 1 : 0;
      if (k[iu] - G[iu] != m[iu] - e) {
        selected = false;
        break;
      }
      p.factors.push_back({ell[iu], beta_mellin_moment(phi.profiles[iu].param, m[iu] - e)});
    }
    if (selected) out.add(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------- limits

LimitResult iterated_limit(const MellinExpr& e, const std::vector<int>& order, std::uint64_t seed) {
  const int q = e.vars();
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int j = 0; j < q; ++j) {
    if (static_cast<int>(sorted.size()) != q || sorted[static_cast<size_t>(j)] != j) {
      throw std::invalid_argument("limit order must be a permutation of the lambda indices");
    }
  }
  std::mt19937_64 rng(seed);
  MellinExpr cur = e;
  for (int v : order) {
    std::map<int, MellinExpr> by_order;
    for (const auto& p : cur.products()) expand_product_in(p, v, by_order, q);
    for (const auto& [o, coeff] : by_order) {
      if (o < 0 && !probes_zero(coeff, rng)) return PoleReport{v, o};
    }
    auto it = by_order.find(0);
    cur = it == by_order.end() ? MellinExpr(q) : it->second;
  }
  ScalarSum out;
  for (const auto& p : cur.products()) {
    if (!p.factors.empty()) throw std::logic_error("limit left unresolved factors");
    out += p.scalar;
  }
  return out;
}

LimitResult iterated_limit(const MellinExpr& e) {
  std::vector<int> order(static_cast<size_t>(e.vars()));
  std::iota(order.begin(), order.end(), 0);
  return iterated_limit(e, order);
}

std::vector<int> default_aswy_exponents(int q) {
  std::vector<int> a{9, 3, 1};
  if (q > 3) throw std::invalid_argument("default exponents cover q <= 3");
  a.resize(static_cast<size_t>(q));
  return a;
}

LimitResult aswy_limit(const MellinExpr& e, const std::vector<int>& a) {
  for (size_t j = 1; j < a.size(); ++j) {
    if (a[j] >= a[j - 1]) throw std::invalid_argument("exponents must be strictly decreasing");
  }
  return power_substitution_limit(e, a);
}

LimitResult power_substitution_limit(const MellinExpr& e, const std::vector<int>& a) {
  if (static_cast<int>(a.size()) != e.vars()) throw DimensionMismatch("one exponent per lambda variable");
  for (int aj : a) {
    if (aj <= 0) throw std::invalid_argument("substitution exponents must be positive");
  }
  std::vector<Poly> lam;
  for (int aj : a) lam.push_back(Poly::monomial(Rational(1), aj));
  auto series = expand_series(e, lam, 1);
  for (const auto& [o, c] : series) {
    if (o < 0) return PoleReport{-1, o};
  }
  auto it = series.find(0);
  return it == series.end() ? ScalarSum() : it->second;
}

std::map<int, ScalarSum> expand_along_line(const MellinExpr& e, const std::vector<Rational>& base,
                                           const std::vector<Rational>& direction, int precision) {
  if (static_cast<int>(base.size()) != e.vars() || direction.size() != base.size()) {
    throw DimensionMismatch("probe line dimension");
  }
  std::vector<Poly> lam;
  for (size_t j = 0; j < base.size(); ++j) lam.push_back(Poly({base[j], direction[j]}));
  return expand_series(e, lam, precision);
}

std::vector<PoleLine> pole_lines_near_orthant(const MellinExpr& e, std::uint64_t seed) {
  std::set<AffineForm> candidates;
  std::vector<std::pair<AffineForm, Rational>> hyperplanes;
  for (const auto& p : e.products()) {
    for (const auto& f : p.factors) {
      for (long c : f.form.coeffs) {
        if (c < 0) throw std::logic_error("denominator form with a negative coefficient");
      }
      for (const auto& shift : f.rat.shifts()) {
        const Rational offset = Rational(f.form.constant) + shift;
        if (sgn(offset) < 0) throw std::logic_error("denominator hyperplane with a negative offset");
        hyperplanes.emplace_back(f.form, offset);
        if (sgn(offset) != 0) continue;
        candidates.insert(primitive(f.form));
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<PoleLine> out;
  const int q = e.vars();
  for (const auto& h : candidates) {
    std::vector<Rational> mu;
    std::vector<Rational> nu;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 64) throw std::logic_error("no generic probe point found");
      mu.clear();
      nu.clear();
      size_t pivot = 0;
      while (h.coeffs[pivot] == 0) ++pivot;
      Rational acc(0);
      for (int j = 0; j < q; ++j) {
        mu.push_back(random_rational(rng, false));
        nu.push_back(random_rational(rng, true));
        if (static_cast<size_t>(j) != pivot) acc += Rational(h.coeffs[static_cast<size_t>(j)]) * mu.back();
      }
      mu[pivot] = -acc / Rational(h.coeffs[pivot]);
      // mu may lie only on hyperplanes that coincide with h.
      bool generic = sgn(h.eval(nu)) != 0;
      for (const auto& [form, offset] : hyperplanes) {
        if (!generic) break;
        if (sgn(form.eval(mu) + offset) != 0) continue;
        if (!(primitive(form) == h) || sgn(offset) != 0) generic = false;
      }
      if (generic) break;
    }
    auto series = expand_along_line(e, mu, nu, 0);
    out.push_back({h, !series.empty()});
  }
  return out;
}

PointValue eval_at_point(const MellinExpr& e, const std::vector<Rational>& lambda) {
  if (static_cast<int>(lambda.size()) != e.vars()) throw DimensionMismatch("evaluation point dimension");
  ScalarSum out;
  const auto& prods = e.products();
  for (size_t idx = 0; idx < prods.size(); ++idx) {
    const auto& p = prods[idx];
    Rational acc(1);
    for (size_t j = 0; j < lambda.size(); ++j) acc *= rational_pow(lambda[j], p.lambda_monomial[j]);
    for (const auto& f : p.factors) {
      auto v = f.rat.eval(f.form.eval(lambda));
      if (!v) return PoleHit{idx, f.form};
      acc *= *v;
    }
    out += scale(p.scalar, acc);
  }
  return out;
}

// ---------------------------------------------------------------- rendering

std::string to_string(const MellinProduct& p) {
  std::string out = to_string(p.scalar);
  for (size_t j = 0; j < p.lambda_monomial.size(); ++j) {
    const int m = p.lambda_monomial[j];
    if (m == 0) continue;
    out += " * λ" + std::to_string(j + 1);
    if (m > 1) out += "^" + std::to_string(m);
  }
  for (const auto& f : p.factors) {
    const std::string var = to_string(f.form);
    const Poly& num = f.rat.numerator();
    std::string numer = num.degree() == 0 ? to_string(num.coeff(0)) : "(" + to_string(num, "(" + var + ")") + ")";
    const bool compound = var.find_first_of("+-") != std::string::npos;
    std::string den;
    for (const auto& c : f.rat.shifts()) {
      if (sgn(c) == 0) {
        den += compound ? "(" + var + ")" : var;
      } else {
        den += "(" + var + (sgn(c) > 0 ? "+" : "") + to_string(c) + ")";
      }
    }
    const bool single = f.rat.shifts().size() == 1 && (compound || sgn(f.rat.shifts()[0]) != 0);
    if (!den.empty()) den = single ? "/" + den : "/(" + den + ")";
    out += " * " + numer + den;
  }
  return out;
}

std::string to_string(const MellinExpr& e) {
  if (e.is_zero()) return "0";
  std::string out;
  for (const auto& p : e.products()) {
    if (!out.empty()) out += " + ";
    out += to_string(p);
  }
  return out;
}

std::string to_string(const PoleLine& line) {
  return to_string(line.form) + "=0: " + (line.certified ? "certified" : "cancelled");
}

std::vector<int> parse_monomial(const std::string& text, int n) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  }
  std::vector<int> g(static_cast<size_t>(n), 0);
  if (s == "1") return g;
  if (s.empty()) throw ParseError("empty monomial");
  static const std::regex factor(R"(x([0-9]+)(\^([0-9]+))?)");
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find('*', start);
    if (end == std::string::npos) end = s.size();
    const std::string tok = s.substr(start, end - start);
    std::smatch m;
    if (!std::regex_match(tok, m, factor)) {
      throw NonMonomialStep("not a monomial in x1..xn: " + text);
    }
    const int i = std::stoi(m[1].str());
    if (i < 1 || i > n) throw DimensionMismatch("variable index out of range in " + text);
    g[static_cast<size_t>(i - 1)] += m[3].matched ? std::stoi(m[3].str()) : 1;
    start = end + 1;
  }
  return g;
}

}  // namespace residua
