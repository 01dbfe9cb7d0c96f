#include "residua/io.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace residua::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> int_list(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<int> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], path + "/" + std::to_string(i)));
  return out;
}

/// 1-based document indices to 0-based, each in [1, bound].
std::vector<int> index_list(const Json& j, int bound, const std::string& path) {
  std::vector<int> out = int_list(j, path);
  for (int& v : out) {
    if (v < 1 || v > bound) fail(path, "index " + std::to_string(v) + " outside 1.." + std::to_string(bound));
    --v;
  }
  return out;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) fail(path, "unknown field '" + it.key() + "'");
  }
}

Gaussian parse_coefficient(const Json& j, const std::string& path) {
  try {
    if (j.is_number_integer()) return Gaussian(j.get<long>());
    if (j.is_string()) return parse_gaussian(j.get<std::string>());
    if (j.is_object()) {
      check_keys(j, {"re", "im"}, path);
      Gaussian g;
      if (j.contains("re")) g.re = parse_rational(as_string(j["re"], path + "/re"));
      if (j.contains("im")) g.im = parse_rational(as_string(j["im"], path + "/im"));
      return g;
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  fail(path, "expected an integer, a string such as \"1/2+3i\" or {\"re\", \"im\"}");
}

template <class F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

}  // namespace

std::string hexfloat(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

// ------------------------------------------------------------ parsing

std::vector<int> parse_exponent(const Json& j, int n, const std::string& path) {
  if (j.is_string()) return guarded(path, [&] { return parse_monomial(j.get<std::string>(), n); });
  std::vector<int> e = int_list(j, path);
  if (static_cast<int>(e.size()) != n) fail(path, "expected " + std::to_string(n) + " exponents");
  for (int v : e) {
    if (v < 0) fail(path, "negative exponent");
  }
  return e;
}

ProductStep parse_step(const Json& j, int n, const std::string& path) {
  check_keys(j, {"kind", "gamma", "witness", "label", "cutoff", "weight"}, path);
  const std::string kind = as_string(require(j, "kind", path), path + "/kind");
  std::vector<int> gamma = parse_exponent(require(j, "gamma", path), n, path + "/gamma");
  std::string label = j.contains("label") ? as_string(j["label"], path + "/label") : std::string();
  ProductStep s;
  if (kind == "RES") {
    s = ProductStep::res(std::move(gamma), std::move(label));
  } else if (kind == "PV") {
    s = ProductStep::pv(std::move(gamma), std::move(label));
  } else {
    fail(path + "/kind", "expected \"RES\" or \"PV\"");
  }
  if (j.contains("witness")) s.witness = parse_exponent(j["witness"], n, path + "/witness");
  guarded(path, [&] { s.validate(n); });
  return s;
}

CutoffProfile parse_cutoff(const Json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string k = j.get<std::string>();
    if (k == "indicator") return CutoffProfile::indicator();
    if (k == "smooth_step") return CutoffProfile::smooth_step(3);
    fail(path, "unknown cutoff '" + k + "'");
  }
  check_keys(j, {"kind", "s"}, path);
  const std::string k = as_string(require(j, "kind", path), path + "/kind");
  if (k == "indicator") return CutoffProfile::indicator();
  if (k != "smooth_step") fail(path + "/kind", "expected \"smooth_step\" or \"indicator\"");
  const int s = j.contains("s") ? as_int(j["s"], path + "/s") : 3;
  return guarded(path, [&] { return CutoffProfile::smooth_step(s); });
}

RadialProfile parse_profile(const Json& j, const std::string& path) {
  check_keys(j, {"kind", "d", "s"}, path);
  const std::string k = as_string(require(j, "kind", path), path + "/kind");
  if (k == "beta") return guarded(path, [&] { return RadialProfile::beta(as_int(require(j, "d", path), path + "/d")); });
  if (k == "plateau") {
    return guarded(path, [&] { return RadialProfile::plateau(as_int(require(j, "s", path), path + "/s")); });
  }
  fail(path + "/kind", "expected \"beta\" or \"plateau\"");
}

TestForm parse_testform(const Json& j, int n, const std::string& path) {
  check_keys(j, {"terms", "profiles", "M", "beta_d"}, path);
  TestForm phi;
  phi.n = n;
  const int beta_d = j.contains("beta_d") ? as_int(j["beta_d"], path + "/beta_d") : 8;
  if (j.contains("profiles")) {
    const Json& p = j["profiles"];
    if (!p.is_array() || static_cast<int>(p.size()) != n) fail(path + "/profiles", "expected " + std::to_string(n) + " profiles");
    for (size_t i = 0; i < p.size(); ++i) phi.profiles.push_back(parse_profile(p[i], path + "/profiles/" + std::to_string(i)));
  } else {
    phi.profiles.assign(static_cast<size_t>(n), guarded(path, [&] { return RadialProfile::beta(beta_d); }));
  }
  if (j.contains("M")) phi.M = index_list(j["M"], n, path + "/M");
  const Json& terms = require(j, "terms", path);
  if (!terms.is_array() || terms.empty()) fail(path + "/terms", "expected a nonempty array");
  for (size_t i = 0; i < terms.size(); ++i) {
    const std::string tp = path + "/terms/" + std::to_string(i);
    check_keys(terms[i], {"k", "m", "c"}, tp);
    MultiIndex k = parse_exponent(require(terms[i], "k", tp), n, tp + "/k");
    MultiIndex m = terms[i].contains("m") ? parse_exponent(terms[i]["m"], n, tp + "/m") : MultiIndex(static_cast<size_t>(n), 0);
    Gaussian c = terms[i].contains("c") ? parse_coefficient(terms[i]["c"], tp + "/c") : Gaussian(1);
    phi.add(std::move(k), std::move(m), c);
  }
  guarded(path, [&] { phi.validate(); });
  return phi;
}

WeightPoly parse_weight(const Json& j, int n, const std::string& path) {
  if (j.is_object() && j.contains("radial_quadratic")) {
    check_keys(j, {"radial_quadratic"}, path);
    return WeightPoly::radial_quadratic(n, as_double(j["radial_quadratic"], path + "/radial_quadratic"));
  }
  check_keys(j, {"terms"}, path);
  const Json& terms = require(j, "terms", path);
  if (!terms.is_array()) fail(path + "/terms", "expected an array");
  WeightPoly w;
  w.n = n;
  for (size_t i = 0; i < terms.size(); ++i) {
    const std::string tp = path + "/terms/" + std::to_string(i);
    check_keys(terms[i], {"k", "m", "c"}, tp);
    w.add(parse_exponent(require(terms[i], "k", tp), n, tp + "/k"), parse_exponent(require(terms[i], "m", tp), n, tp + "/m"),
          as_double(require(terms[i], "c", tp), tp + "/c"));
  }
  return w;
}

RegularizedStep parse_regularized_step(const Json& j, int n, const CutoffProfile& fallback, const std::string& path) {
  RegularizedStep r;
  r.step = parse_step(j, n, path);
  r.cutoff = j.contains("cutoff") ? parse_cutoff(j["cutoff"], path + "/cutoff") : fallback;
  if (j.contains("weight")) r.weight = parse_weight(j["weight"], n, path + "/weight");
  return r;
}

GridSpec parse_grid(const Json& j, GridSpec g, const std::string& path) {
  check_keys(j, {"gauss_order", "max_panel_width", "angular_points", "tol", "abs_tol", "max_level", "budget", "threads",
                 "decay_cutoff"},
             path);
  if (j.contains("gauss_order")) g.gauss_order = as_int(j["gauss_order"], path + "/gauss_order");
  if (j.contains("max_panel_width")) g.max_panel_width = as_double(j["max_panel_width"], path + "/max_panel_width");
  if (j.contains("angular_points")) g.angular_points = as_int(j["angular_points"], path + "/angular_points");
  if (j.contains("tol")) g.tol = as_double(j["tol"], path + "/tol");
  if (j.contains("abs_tol")) g.abs_tol = as_double(j["abs_tol"], path + "/abs_tol");
  if (j.contains("max_level")) g.max_level = as_int(j["max_level"], path + "/max_level");
  if (j.contains("budget")) {
    if (!j["budget"].is_number_unsigned()) fail(path + "/budget", "expected a nonnegative integer");
    g.budget = j["budget"].get<std::uint64_t>();
  }
  if (j.contains("threads")) g.threads = as_int(j["threads"], path + "/threads");
  if (j.contains("decay_cutoff")) g.decay_cutoff = as_double(j["decay_cutoff"], path + "/decay_cutoff");
  return g;
}

EpsilonSchedule parse_schedule(const Json& j, const std::string& path) {
  check_keys(j, {"kind", "beta", "epsilons"}, path);
  const std::string k = as_string(require(j, "kind", path), path + "/kind");
  if (k == "iterated") return EpsilonSchedule::iterated();
  if (k == "diagonal") return EpsilonSchedule::diagonal();
  if (k == "tower") return EpsilonSchedule::tower(j.contains("beta") ? as_double(j["beta"], path + "/beta") : 2.0);
  if (k == "custom") {
    const Json& e = require(j, "epsilons", path);
    if (!e.is_array()) fail(path + "/epsilons", "expected an array of epsilon vectors");
    std::vector<std::vector<double>> eps;
    for (size_t i = 0; i < e.size(); ++i) {
      const std::string ep = path + "/epsilons/" + std::to_string(i);
      if (!e[i].is_array()) fail(ep, "expected an array");
      std::vector<double> row;
      for (size_t r = 0; r < e[i].size(); ++r) row.push_back(as_double(e[i][r], ep + "/" + std::to_string(r)));
      eps.push_back(std::move(row));
    }
    return EpsilonSchedule::custom_list(std::move(eps));
  }
  fail(path + "/kind", "expected \"iterated\", \"tower\", \"diagonal\" or \"custom\"");
}

ExtrapolationConfig parse_extrapolation(const Json& j, ExtrapolationConfig c, const std::string& path) {
  check_keys(j, {"ladder_points", "log_multiplicity", "start_root", "inner_gap", "inner_power"}, path);
  if (j.contains("ladder_points")) c.ladder_points = as_int(j["ladder_points"], path + "/ladder_points");
  if (j.contains("log_multiplicity")) c.log_multiplicity = as_int(j["log_multiplicity"], path + "/log_multiplicity");
  if (j.contains("start_root")) c.start_root = as_double(j["start_root"], path + "/start_root");
  if (j.contains("inner_gap")) c.inner_gap = as_double(j["inner_gap"], path + "/inner_gap");
  if (j.contains("inner_power")) c.inner_power = as_double(j["inner_power"], path + "/inner_power");
  return c;
}

VectorSection parse_section(const Json& j, int n, const std::string& path) {
  check_keys(j, {"rank", "components", "support_witness"}, path);
  const Json& comps = require(j, "components", path);
  if (!comps.is_array()) fail(path + "/components", "expected an array of polynomials");
  VectorSection f;
  f.n = n;
  for (size_t i = 0; i < comps.size(); ++i) {
    const std::string cp = path + "/components/" + std::to_string(i);
    f.components.push_back(guarded(cp, [&] { return HoloPoly::parse(as_string(comps[i], cp), n); }));
  }
  if (j.contains("rank") && as_int(j["rank"], path + "/rank") != f.rank()) {
    fail(path + "/rank", "rank differs from the number of components");
  }
  f.support_witness = int_list(require(j, "support_witness", path), path + "/support_witness");
  guarded(path, [&] { f.validate(); });
  return f;
}

CFLFactorSpec parse_cfl_factor(const Json& j, int n, const std::string& path) {
  check_keys(j, {"section", "kind", "k", "cutoff", "component"}, path);
  VectorSection f = parse_section(require(j, "section", path), n, path + "/section");
  const std::string kind = as_string(require(j, "kind", path), path + "/kind");
  const int k = as_int(require(j, "k", path), path + "/k");
  CFLFactorSpec spec;
  if (kind == "U") {
    spec = CFLFactorSpec::U(std::move(f), k);
  } else if (kind == "R") {
    spec = CFLFactorSpec::R(std::move(f), k);
  } else {
    fail(path + "/kind", "expected \"U\" or \"R\"");
  }
  if (j.contains("cutoff")) spec.cutoff = parse_cutoff(j["cutoff"], path + "/cutoff");
  if (j.contains("component")) spec.component = index_list(j["component"], spec.section.rank(), path + "/component");
  return spec;
}

// ------------------------------------------------------------ encoding

Json encode(const Complex& z) {
  Json j;
  j["re"] = z.real();
  j["im"] = z.imag();
  j["re_hex"] = hexfloat(z.real());
  j["im_hex"] = hexfloat(z.imag());
  return j;
}

Json encode(const ScalarSum& x) {
  Json j;
  j["exact"] = to_string(x);
  const auto z = x.to_complex();
  j["numeric"] = encode(Complex(static_cast<double>(z.real()), static_cast<double>(z.imag())));
  return j;
}

Json encode(const ProductStep& s) {
  Json j;
  j["kind"] = s.kind == ProductStep::Kind::RES ? "RES" : "PV";
  j["gamma"] = s.gamma;
  j["witness"] = s.regularizer();
  if (!s.label.empty()) j["label"] = s.label;
  return j;
}

Json encode(const TestForm& phi) {
  Json j;
  j["n"] = phi.n;
  Json terms = Json::array();
  for (const auto& [km, c] : phi.coeff) {
    Json t;
    t["k"] = km.first;
    t["m"] = km.second;
    t["c"] = to_string(c);
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  Json profiles = Json::array();
  for (const RadialProfile& p : phi.profiles) {
    Json pj;
    if (p.kind == RadialProfile::Kind::Beta) {
      pj["kind"] = "beta";
      pj["d"] = p.param;
    } else {
      pj["kind"] = "plateau";
      pj["s"] = p.param;
    }
    profiles.push_back(std::move(pj));
  }
  j["profiles"] = std::move(profiles);
  Json M = Json::array();
  for (int i : phi.M) M.push_back(i + 1);
  j["M"] = std::move(M);
  return j;
}

Json encode(const VectorSection& f) {
  Json j;
  j["rank"] = f.rank();
  Json comps = Json::array();
  for (const HoloPoly& p : f.components) comps.push_back(p.to_string());
  j["components"] = std::move(comps);
  j["support_witness"] = f.support_witness;
  return j;
}

Json encode(const CurrentSum& T) {
  Json j;
  j["n"] = T.n();
  j["terms"] = T.size();
  j["current"] = to_string(T);
  return j;
}

Json encode(const LimitResult& r) {
  Json j;
  if (const auto* v = std::get_if<ScalarSum>(&r)) {
    j["status"] = "finite";
    j["value"] = encode(*v);
  } else {
    const auto& p = std::get<PoleReport>(r);
    j["status"] = "pole";
    j["variable"] = p.variable + 1;
    j["order"] = p.order;
  }
  return j;
}

Json encode(const PoleLine& line) {
  Json j;
  j["line"] = to_string(line);
  j["coefficients"] = line.form.coeffs;
  j["certified"] = line.certified;
  return j;
}

Json encode(const RateFit& fit) {
  Json j;
  j["C"] = fit.C;
  j["omega"] = fit.omega;
  j["r2"] = fit.r2;
  j["omega_hex"] = hexfloat(fit.omega);
  return j;
}

Json encode(const NumericalResult& r) {
  Json j;
  j["value"] = encode(r.value);
  j["uncertainty"] = r.uncertainty;
  j["uncertainty_hex"] = hexfloat(r.uncertainty);
  j["grid_level"] = r.grid_level;
  j["evaluations"] = r.evaluations;
  j["budget_exceeded"] = r.budget_exceeded;
  j["no_convergence"] = r.no_convergence;
  Json hist = Json::array();
  for (const Complex& z : r.refinement_history) hist.push_back(encode(z));
  j["refinement_history"] = std::move(hist);
  Json ladder = Json::array();
  for (const LadderSample& s : r.ladder) {
    Json sj;
    sj["epsilon"] = s.epsilon;
    sj["value"] = encode(s.value);
    sj["uncertainty"] = s.uncertainty;
    ladder.push_back(std::move(sj));
  }
  j["history"] = std::move(ladder);
  Json table = Json::array();
  for (const auto& row : r.extrapolation_table) {
    Json rj = Json::array();
    for (const Complex& z : row) rj.push_back(encode(z));
    table.push_back(std::move(rj));
  }
  j["extrapolation_table"] = std::move(table);
  return j;
}

}  // namespace residua::io
