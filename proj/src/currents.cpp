#include "residua/currents.hpp"

#include <algorithm>
#include <set>

namespace residua {

namespace {

std::vector<std::pair<int, int>> res_list(const std::map<int, int>& res) { return {res.begin(), res.end()}; }

void check_gamma(const std::vector<int>& gamma, int n) {
  if (static_cast<int>(gamma.size()) != n) throw DimensionMismatch("exponent vector length differs from n");
  for (int g : gamma) {
    if (g < 0) throw std::invalid_argument("negative exponent in step");
  }
}

std::string rational_coeff_prefix(const ExactScalar& c) {
  if (c == ExactScalar(1)) return "";
  if (c == ExactScalar(-1)) return "-";
  if (c.s() == 0 && sgn(c.g().im) == 0) return to_string(c.g().re) + "*";
  return to_string(c) + "*";
}

}  // namespace

ElementaryTerm normalize_term(int n, const ExactScalar& coeff, std::vector<int> pv,
                              const std::vector<std::pair<int, int>>& res_in_wedge_order) {
  if (static_cast<int>(pv.size()) != n) throw DimensionMismatch("pv exponent length differs from n");
  ElementaryTerm t;
  t.n = n;
  t.pv = std::move(pv);
  std::vector<int> keys;
  for (const auto& [j, b] : res_in_wedge_order) {
    if (j < 0 || j >= n) throw DimensionMismatch("residue index out of range");
    if (b <= 0) throw std::invalid_argument("residue exponent must be positive");
    if (t.pv[static_cast<size_t>(j)] > 0) {
      throw OverlapError("principal-value and residue supports intersect at variable x" + std::to_string(j + 1));
    }
    keys.push_back(j);
  }
  std::set<int> distinct(keys.begin(), keys.end());
  if (distinct.size() != keys.size()) {
    // dbar(1/x_j^a) ^ dbar(1/x_j^b) = 0.
    t.coeff = ExactScalar();
    return t;
  }
  for (const auto& [j, b] : res_in_wedge_order) t.res[j] = b;
  t.coeff = permutation_sign(keys) > 0 ? coeff : -coeff;
  return t;
}

// -------------------------------------------------------------- CurrentSum

CurrentSum CurrentSum::unit(int n) {
  CurrentSum T(n);
  T.add({std::vector<int>(static_cast<size_t>(n), 0), {}}, ExactScalar(1));
  return T;
}

std::vector<ElementaryTerm> CurrentSum::terms() const {
  std::vector<ElementaryTerm> out;
  for (const auto& [key, c] : terms_) {
    ElementaryTerm t;
    t.n = n_;
    t.coeff = c;
    t.pv = key.first;
    t.res = std::map<int, int>(key.second.begin(), key.second.end());
    out.push_back(std::move(t));
  }
  return out;
}

void CurrentSum::add(Key key, const ExactScalar& c) {
  if (c.is_zero()) return;
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(std::move(key), c);
    return;
  }
  auto sum = try_add(it->second, c);
  if (!sum) throw std::logic_error("current coefficients with different powers of 2*pi*i");
  if (sum->is_zero()) {
    terms_.erase(it);
  } else {
    it->second = *sum;
  }
}

void CurrentSum::add(const ElementaryTerm& t) {
  if (t.n != n_) throw DimensionMismatch("term dimension differs from current dimension");
  for (const auto& [j, b] : t.res) {
    if (t.pv.at(static_cast<size_t>(j)) > 0) throw OverlapError("term violates support disjointness");
    (void)b;
  }
  add({t.pv, res_list(t.res)}, t.coeff);
}

CurrentSum& CurrentSum::operator+=(const CurrentSum& other) {
  if (other.n_ != n_) throw DimensionMismatch("adding currents of different dimension");
  for (const auto& [key, c] : other.terms_) add(key, c);
  return *this;
}

CurrentSum operator*(const CurrentSum& a, const ExactScalar& c) {
  CurrentSum out(a.n_);
  for (const auto& [key, v] : a.terms_) out.add(key, v * c);
  return out;
}

ProductStep ProductStep::res(std::vector<int> gamma, std::string label) {
  return {Kind::RES, std::move(gamma), {}, std::move(label)};
}

ProductStep ProductStep::pv(std::vector<int> gamma, std::string label) {
  return {Kind::PV, std::move(gamma), {}, std::move(label)};
}

void ProductStep::validate(int n) const {
  check_gamma(gamma, n);
  if (!witness.empty()) {
    check_gamma(witness, n);
    for (int i = 0; i < n; ++i) {
      const auto iu = static_cast<size_t>(i);
      if ((gamma[iu] > 0) != (witness[iu] > 0)) {
        throw std::invalid_argument("support witness and exponent have different supports");
      }
    }
  }
  if (kind == Kind::RES && std::all_of(gamma.begin(), gamma.end(), [](int g) { return g == 0; })) {
    throw DegenerateStep("residue step with zero exponent: dbar|1|^{2 lambda} vanishes identically");
  }
}

// --------------------------------------------------------------- operations

CurrentSum dbar(const CurrentSum& T) {
  CurrentSum out(T.n());
  for (const auto& t : T.terms()) {
    for (int i = 0; i < t.n; ++i) {
      const int a = t.pv[static_cast<size_t>(i)];
      if (a == 0) continue;
      ElementaryTerm u = t;
      u.pv[static_cast<size_t>(i)] = 0;
      u.res[i] = a;
      const auto smaller = std::count_if(t.res.begin(), t.res.end(), [i](const auto& r) { return r.first < i; });
      u.coeff = smaller % 2 == 0 ? t.coeff : -t.coeff;
      out.add(u);
    }
  }
  return out;
}

CurrentSum pv_step(const std::vector<int>& gamma, const CurrentSum& T) {
  check_gamma(gamma, T.n());
  CurrentSum out(T.n());
  for (const auto& t : T.terms()) {
    bool annihilated = false;
    for (const auto& [j, b] : t.res) {
      if (gamma[static_cast<size_t>(j)] > 0) annihilated = true;
    }
    if (annihilated) continue;
    ElementaryTerm u = t;
    for (int i = 0; i < t.n; ++i) u.pv[static_cast<size_t>(i)] += gamma[static_cast<size_t>(i)];
    out.add(u);
  }
  return out;
}

CurrentSum res_step(const std::vector<int>& gamma, const CurrentSum& T) {
  check_gamma(gamma, T.n());
  if (std::all_of(gamma.begin(), gamma.end(), [](int g) { return g == 0; })) {
    throw DegenerateStep("residue step with zero exponent: dbar|1|^{2 lambda} vanishes identically");
  }
  return dbar(pv_step(gamma, T)) - pv_step(gamma, dbar(T));
}

CurrentSum sequential_product(const std::vector<ProductStep>& steps) {
  if (steps.empty()) throw EmptyProduct("sequential product needs at least one step");
  const int n = static_cast<int>(steps.front().gamma.size());
  CurrentSum T = CurrentSum::unit(n);
  for (const auto& step : steps) {
    step.validate(n);
    T = step.kind == ProductStep::Kind::RES ? res_step(step.gamma, T) : pv_step(step.gamma, T);
  }
  return T;
}

int orientation_sign(int n, const std::vector<int>& dbar_order, const std::vector<int>& M) {
  std::vector<int> keys;
  std::set<int> seen;
  auto push_bar = [&](int i) {
    if (i < 0 || i >= n) throw DimensionMismatch("form index out of range");
    if (!seen.insert(i).second) return false;
    keys.push_back(2 * i);
    return true;
  };
  for (int i : dbar_order) {
    if (!push_bar(i)) return 0;
  }
  for (int i : M) {
    if (!push_bar(i)) return 0;
  }
  for (int i = 0; i < n; ++i) keys.push_back(2 * i + 1);
  return permutation_sign(keys);
}

ScalarSum pair_with_testform(const CurrentSum& T, const TestForm& phi) {
  if (T.n() != phi.n) throw DimensionMismatch("current and test form live on different C^n");
  phi.validate();
  const int n = T.n();
  ScalarSum out;
  for (const auto& t : T.terms()) {
    std::vector<int> res_idx;
    for (const auto& [j, b] : t.res) res_idx.push_back(j);
    std::vector<int> complement;
    for (int i = 0; i < n; ++i) {
      if (!t.res.count(i)) complement.push_back(i);
    }
    if (complement != phi.M) continue;
    const int sigma = orientation_sign(n, res_idx, phi.M);
    if (sigma == 0) continue;
    for (const auto& [km, c] : phi.coeff) {
      const auto& [k, m] = km;
      Rational radial(1);
      for (int i = 0; i < n && sgn(radial) != 0; ++i) {
        const auto iu = static_cast<size_t>(i);
        auto r = t.res.find(i);
        if (r != t.res.end()) {
          if (m[iu] == 0 && k[iu] == r->second - 1) {
            radial *= profile_eval(phi.profiles[iu], Rational(0));
          } else {
            radial = 0;
          }
        } else if (k[iu] - t.pv[iu] == m[iu]) {
          radial *= moment(phi.profiles[iu], m[iu]);
        } else {
          radial = 0;
        }
      }
      if (sgn(radial) == 0) continue;
      ExactScalar term = t.coeff * ExactScalar(c * Gaussian(radial * sigma), n);
      out += term;
    }
  }
  return out;
}

// ---------------------------------------------------------------- rendering

std::string to_string(const ElementaryTerm& t) {
  std::string body;
  std::vector<std::string> pv_parts;
  for (int i = 0; i < t.n; ++i) {
    const int a = t.pv[static_cast<size_t>(i)];
    if (a == 0) continue;
    std::string part = "x" + std::to_string(i + 1);
    if (a > 1) part += "^" + std::to_string(a);
    pv_parts.push_back(part);
  }
  if (!pv_parts.empty()) {
    std::string den;
    for (size_t i = 0; i < pv_parts.size(); ++i) den += (i ? "*" : "") + pv_parts[i];
    body = pv_parts.size() == 1 ? "1/" + den : "1/(" + den + ")";
  }
  std::string res;
  for (const auto& [j, b] : t.res) {
    if (!res.empty()) res += "∧";
    res += "∂̄(1/x" + std::to_string(j + 1) + (b > 1 ? "^" + std::to_string(b) : "") + ")";
  }
  if (!res.empty()) body = body.empty() ? res : body + "·" + res;
  if (body.empty()) body = "1";
  return rational_coeff_prefix(t.coeff) + body;
}

std::string to_string(const CurrentSum& T) {
  if (T.is_zero()) return "0";
  std::string out;
  for (const auto& t : T.terms()) {
    std::string s = to_string(t);
    if (!out.empty()) out += s.front() == '-' ? " " : " + ";
    out += s;
  }
  return out;
}

}  // namespace residua
