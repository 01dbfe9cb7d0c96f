#include "residua/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "residua/cfl.hpp"
#include "residua/checks.hpp"
#include "residua/currents.hpp"
#include "residua/mellin.hpp"
#include "residua/quadrature.hpp"

namespace residua {

const char* const kEngineVersion = "residua 1.0.0";

namespace fs = std::filesystem;
using io::Json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

const std::set<std::string>& kinds() {
  static const std::set<std::string> k{"pair", "mellin", "sweep", "limit", "cfl", "check"};
  return k;
}

std::set<std::string> allowed_fields(const std::string& kind) {
  if (kind == "pair") return {"kind", "n", "seed", "steps", "testform"};
  if (kind == "mellin") return {"kind", "n", "seed", "steps", "testform", "order", "aswy", "lambda"};
  if (kind == "sweep") {
    return {"kind", "n", "seed", "steps", "testform", "cutoff", "grid", "epsilons", "fit_rate", "reference"};
  }
  if (kind == "limit") return {"kind", "n", "seed", "steps", "testform", "cutoff", "grid", "schedule", "extrapolation"};
  if (kind == "cfl") return {"kind", "n", "seed", "factors", "testform", "epsilon", "schedule", "extrapolation", "grid"};
  return {"kind", "seed", "suite", "catalog_size", "numeric_cases"};
}

int doc_n(const Json& p) {
  auto it = p.find("n");
  if (it == p.end()) fail("/n", "missing field 'n'");
  if (!it->is_number_integer() || it->get<int>() < 1 || it->get<int>() > 3) fail("/n", "expected an integer in 1..3");
  return it->get<int>();
}

const Json& field(const Json& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end()) fail(std::string("/") + key, "missing field");
  return *it;
}

bool flag(const Json& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end()) return false;
  if (!it->is_boolean()) fail(std::string("/") + key, "expected a boolean");
  return it->get<bool>();
}

std::optional<std::uint64_t> effective_seed(const Json& p, const RunOptions& opt) {
  if (opt.seed) return opt.seed;
  auto it = p.find("seed");
  if (it == p.end()) return std::nullopt;
  if (!it->is_number_unsigned()) fail("/seed", "expected a nonnegative integer");
  return it->get<std::uint64_t>();
}

std::uint64_t required_seed(const Json& p, const RunOptions& opt) {
  auto s = effective_seed(p, opt);
  if (!s) fail("/seed", "a seed is required for this kind (document field or --seed)");
  return *s;
}

std::vector<ProductStep> parse_steps(const Json& p, int n) {
  const Json& s = field(p, "steps");
  if (!s.is_array() || s.empty()) fail("/steps", "expected a nonempty array");
  std::vector<ProductStep> out;
  for (size_t i = 0; i < s.size(); ++i) out.push_back(io::parse_step(s[i], n, "/steps/" + std::to_string(i)));
  return out;
}

std::vector<RegularizedStep> parse_reg_steps(const Json& p, int n) {
  const Json& s = field(p, "steps");
  if (!s.is_array() || s.empty()) fail("/steps", "expected a nonempty array");
  const CutoffProfile fallback = p.contains("cutoff") ? io::parse_cutoff(p["cutoff"], "/cutoff") : CutoffProfile::smooth_step(3);
  std::vector<RegularizedStep> out;
  for (size_t i = 0; i < s.size(); ++i) {
    out.push_back(io::parse_regularized_step(s[i], n, fallback, "/steps/" + std::to_string(i)));
  }
  return out;
}

GridSpec parse_grid_opt(const Json& p, const RunOptions& opt) {
  GridSpec g = p.contains("grid") ? io::parse_grid(p["grid"], GridSpec{}, "/grid") : GridSpec{};
  if (opt.threads) g.threads = *opt.threads;
  if (opt.tol) g.tol = *opt.tol;
  if (opt.budget) g.budget = *opt.budget;
  if (g.threads < 1) fail("/grid/threads", "expected at least one thread");
  if (!(g.tol > 0)) fail("/grid/tol", "expected a positive tolerance");
  return g;
}

std::vector<double> number_row(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "/" + std::to_string(i), "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

/// Explicit [[eps_1..eps_q], ...] or {"geometric": {"from", "to", "points", "exponents"?}} with
/// eps_j = delta^{exponents_j}.
std::vector<std::vector<double>> parse_epsilons(const Json& p, int q) {
  const Json& e = field(p, "epsilons");
  std::vector<std::vector<double>> out;
  if (e.is_array()) {
    for (size_t i = 0; i < e.size(); ++i) {
      auto row = number_row(e[i], "/epsilons/" + std::to_string(i));
      if (static_cast<int>(row.size()) != q) fail("/epsilons/" + std::to_string(i), "expected one epsilon per step");
      for (double v : row) {
        if (!(v > 0) || !std::isfinite(v)) fail("/epsilons/" + std::to_string(i), "epsilons must be positive");
      }
      out.push_back(std::move(row));
    }
    return out;
  }
  if (!e.is_object() || !e.contains("geometric")) fail("/epsilons", "expected an array or {\"geometric\": ...}");
  const Json& g = e["geometric"];
  const std::string gp = "/epsilons/geometric";
  if (!g.is_object() || !g.contains("from") || !g.contains("to") || !g.contains("points")) {
    fail(gp, "expected fields from, to, points");
  }
  if (!g["from"].is_number() || !g["to"].is_number() || !g["points"].is_number_integer()) fail(gp, "malformed range");
  const double from = g["from"].get<double>();
  const double to = g["to"].get<double>();
  const int points = g["points"].get<int>();
  if (!(from > 0) || !(to > 0) || points < 0) fail(gp, "expected positive endpoints and points >= 0");
  std::vector<double> exps(static_cast<size_t>(q), 1.0);
  if (g.contains("exponents")) {
    exps = number_row(g["exponents"], gp + "/exponents");
    if (static_cast<int>(exps.size()) != q) fail(gp + "/exponents", "expected one exponent per step");
  }
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const double delta = std::exp(std::log(from) + t * (std::log(to) - std::log(from)));
    std::vector<double> row;
    for (double a : exps) row.push_back(std::pow(delta, a));
    out.push_back(std::move(row));
  }
  return out;
}

std::string decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Complex numeric_value(const ScalarSum& x) {
  const auto z = x.to_complex();
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

/// Two-column blocks separated by blank lines, one per series.
struct PlotData {
  std::ostringstream os;
  void series(const std::string& title, const std::vector<std::pair<double, double>>& xy,
              const std::vector<std::string>& comments = {}) {
    if (os.tellp() > 0) os << "\n\n";
    os << "# " << title << "\n";
    for (const auto& c : comments) os << "# " << c << "\n";
    for (const auto& [x, y] : xy) os << decimal(x) << " " << decimal(y) << "\n";
  }
};

Json exact_value_json(const std::vector<ProductStep>& steps, const TestForm& phi, const EpsilonSchedule& schedule) {
  const MellinExpr G = build_gamma({steps, phi});
  LimitResult r = schedule.kind == EpsilonSchedule::Kind::Diagonal
                      ? power_substitution_limit(G, std::vector<int>(steps.size(), 1))
                      : iterated_limit(G);
  return io::encode(r);
}

// ------------------------------------------------------------ kinds

Report run_pair(const Json& p) {
  const int n = doc_n(p);
  const auto steps = parse_steps(p, n);
  std::optional<TestForm> phi;
  if (p.contains("testform")) phi = io::parse_testform(p["testform"], n, "/testform");
  Report r;
  const CurrentSum T = sequential_product(steps);
  r.json["current"] = io::encode(T);
  Json terms = Json::array();
  for (const auto& t : T.terms()) terms.push_back(to_string(t));
  r.json["terms"] = std::move(terms);
  if (phi) r.json["pairing"] = io::encode(pair_with_testform(T, *phi));
  return r;
}

Report run_mellin(const Json& p, std::uint64_t seed) {
  const int n = doc_n(p);
  const auto steps = parse_steps(p, n);
  const TestForm phi = io::parse_testform(field(p, "testform"), n, "/testform");
  const int q = static_cast<int>(steps.size());
  std::vector<int> order;
  if (p.contains("order")) {
    const Json& o = p["order"];
    std::set<int> seen;
    if (!o.is_array() || static_cast<int>(o.size()) != q) fail("/order", "expected a permutation of 1..q");
    for (const auto& v : o) {
      if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > q || !seen.insert(v.get<int>()).second) {
        fail("/order", "expected a permutation of 1..q");
      }
      order.push_back(v.get<int>() - 1);
    }
  } else {
    for (int j = 0; j < q; ++j) order.push_back(j);
  }
  std::vector<int> aswy = default_aswy_exponents(q);
  if (p.contains("aswy")) {
    const Json& a = p["aswy"];
    if (!a.is_array() || static_cast<int>(a.size()) != q) fail("/aswy", "expected q positive exponents");
    aswy.clear();
    for (const auto& v : a) {
      if (!v.is_number_integer() || v.get<int>() < 1) fail("/aswy", "expected q positive exponents");
      aswy.push_back(v.get<int>());
    }
  }
  std::optional<std::vector<Rational>> point;
  if (p.contains("lambda")) {
    const Json& l = p["lambda"];
    if (!l.is_array() || static_cast<int>(l.size()) != q) fail("/lambda", "expected q rationals");
    point.emplace();
    for (size_t i = 0; i < l.size(); ++i) {
      try {
        if (l[i].is_number_integer()) {
          point->push_back(Rational(l[i].get<long>()));
        } else if (l[i].is_string()) {
          point->push_back(parse_rational(l[i].get<std::string>()));
        } else {
          fail("/lambda/" + std::to_string(i), "expected an integer or a rational string");
        }
      } catch (const SchemaError&) {
        throw;
      } catch (const std::exception& e) {
        fail("/lambda/" + std::to_string(i), e.what());
      }
    }
  }

  Report r;
  const MellinExpr G = build_gamma({steps, phi});
  r.json["expression"] = to_string(G);
  r.json["products"] = G.products().size();
  Json ord = Json::array();
  for (int v : order) ord.push_back(v + 1);
  r.json["order"] = std::move(ord);
  r.json["iterated_limit"] = io::encode(iterated_limit(G, order, seed));
  r.json["aswy_exponents"] = aswy;
  r.json["aswy_limit"] = io::encode(aswy_limit(G, aswy));
  r.json["diagonal_limit"] = io::encode(power_substitution_limit(G, std::vector<int>(static_cast<size_t>(q), 1)));
  Json lines = Json::array();
  for (const PoleLine& l : pole_lines_near_orthant(G, seed)) lines.push_back(io::encode(l));
  r.json["pole_lines"] = std::move(lines);
  if (point) {
    Json pj;
    Json lam = Json::array();
    for (const auto& v : *point) lam.push_back(to_string(v));
    pj["lambda"] = std::move(lam);
    const PointValue v = eval_at_point(G, *point);
    if (const auto* s = std::get_if<ScalarSum>(&v)) {
      pj["status"] = "finite";
      pj["value"] = io::encode(*s);
    } else {
      pj["status"] = "pole";
      pj["hyperplane"] = to_string(std::get<PoleHit>(v).hyperplane);
    }
    r.json["point"] = std::move(pj);
  }
  return r;
}

Report run_sweep(const Json& p, const RunOptions& opt) {
  const int n = doc_n(p);
  const auto steps = parse_reg_steps(p, n);
  const TestForm phi = io::parse_testform(field(p, "testform"), n, "/testform");
  const int q = static_cast<int>(steps.size());
  const auto epsilons = parse_epsilons(p, q);
  const GridSpec grid = parse_grid_opt(p, opt);
  const bool fit = flag(p, "fit_rate");
  std::optional<Complex> reference;
  if (p.contains("reference")) {
    const Json& ref = p["reference"];
    if (!ref.is_object() || !ref.contains("re") || !ref["re"].is_number() || (ref.contains("im") && !ref["im"].is_number())) {
      fail("/reference", "expected {\"re\": x, \"im\": y}");
    }
    reference = Complex(ref["re"].get<double>(), ref.contains("im") ? ref["im"].get<double>() : 0.0);
  }
  RegularizedSpec spec;
  spec.steps = steps;
  spec.testform = phi;
  spec.validate();

  Report r;
  for (int j = 1; j <= q; ++j) r.csv_header.push_back("eps_" + std::to_string(j));
  for (const char* h : {"re", "im", "uncertainty", "grid_level"}) r.csv_header.push_back(h);

  Json points = Json::array();
  std::vector<std::pair<double, double>> re_xy, im_xy;
  std::vector<std::pair<double, Complex>> values;
  for (const auto& eps : epsilons) {
    spec.epsilon = eps;
    const NumericalResult res = eval_regularized_integral(spec, grid);
    Json pj;
    pj["epsilon"] = eps;
    pj["result"] = io::encode(res);
    points.push_back(std::move(pj));
    // One row per refinement level. Coarse levels carry their distance to the finest level, the
    // finest carries the reported uncertainty, so each block is nonincreasing under refinement.
    const auto& h = res.refinement_history;
    for (size_t l = 0; l < h.size(); ++l) {
      std::vector<std::string> row;
      for (double e : eps) row.push_back(decimal(e));
      row.push_back(decimal(h[l].real()));
      row.push_back(decimal(h[l].imag()));
      row.push_back(decimal(l + 1 == h.size() ? res.uncertainty : std::abs(h[l] - h.back())));
      row.push_back(std::to_string(l));
      r.csv_rows.push_back(std::move(row));
    }
    re_xy.emplace_back(eps.back(), res.value.real());
    im_xy.emplace_back(eps.back(), res.value.imag());
    values.emplace_back(eps.back(), res.value);
  }
  r.json["points"] = std::move(points);
  PlotData plot;
  if (!values.empty()) {
    plot.series("x: eps_" + std::to_string(q) + ", y: re", re_xy);
    plot.series("x: eps_" + std::to_string(q) + ", y: im", im_xy);
  }
  if (fit) {
    Json fj;
    Complex limit;
    if (reference) {
      limit = *reference;
      fj["reference_source"] = "document";
    } else {
      std::vector<ProductStep> plain;
      for (const auto& s : steps) plain.push_back(s.step);
      const LimitResult lr = iterated_limit(build_gamma({plain, phi}));
      const auto* v = std::get_if<ScalarSum>(&lr);
      if (!v) throw DegenerateFit("the exact iterated limit has a pole; give a reference value");
      limit = numeric_value(*v);
      fj["reference_source"] = "exact";
    }
    fj["reference"] = io::encode(limit);
    std::vector<std::pair<double, double>> samples;
    for (const auto& [x, v] : values) samples.emplace_back(x, std::abs(v - limit));
    const RateFit rf = rate_fit(samples);
    fj["fit"] = io::encode(rf);
    r.json["rate"] = std::move(fj);
    std::vector<std::pair<double, double>> line;
    for (const auto& [x, e] : samples) line.emplace_back(x, rf.C * std::pow(x, rf.omega));
    plot.series("x: eps_" + std::to_string(q) + ", y: |I(eps) - limit|", samples,
                {"fit: log err = log C + omega log eps", "C " + decimal(rf.C), "omega " + decimal(rf.omega),
                 "r2 " + decimal(rf.r2)});
    plot.series("x: eps_" + std::to_string(q) + ", y: C eps^omega", line);
  }
  r.plotdata = plot.os.str();
  return r;
}

EpsilonSchedule schedule_or_default(const Json& p) {
  return p.contains("schedule") ? io::parse_schedule(p["schedule"], "/schedule") : EpsilonSchedule::iterated();
}

ExtrapolationConfig extrapolation_or_default(const Json& p) {
  return p.contains("extrapolation") ? io::parse_extrapolation(p["extrapolation"], {}, "/extrapolation")
                                     : ExtrapolationConfig{};
}

std::string ladder_plot(const NumericalResult& res) {
  PlotData plot;
  std::vector<std::pair<double, double>> re, im;
  for (const auto& s : res.ladder) {
    if (s.epsilon.empty()) continue;
    re.emplace_back(s.epsilon.back(), s.value.real());
    im.emplace_back(s.epsilon.back(), s.value.imag());
  }
  if (re.empty()) return {};
  plot.series("x: outermost eps, y: re", re, {"limit re " + decimal(res.value.real())});
  plot.series("x: outermost eps, y: im", im, {"limit im " + decimal(res.value.imag())});
  return plot.os.str();
}

Report run_limit(const Json& p, const RunOptions& opt) {
  const int n = doc_n(p);
  RegularizedSpec spec;
  spec.steps = parse_reg_steps(p, n);
  spec.testform = io::parse_testform(field(p, "testform"), n, "/testform");
  const EpsilonSchedule schedule = schedule_or_default(p);
  const ExtrapolationConfig config = extrapolation_or_default(p);
  const GridSpec grid = parse_grid_opt(p, opt);
  spec.validate();

  Report r;
  const NumericalResult res = iterated_limit_estimate(spec, schedule, config, grid);
  r.json["estimate"] = io::encode(res);
  // The exact iterated value is the limit along the iterated schedule. The lambda diagonal is a
  // different path from the epsilon diagonal and is reported under its own name.
  std::vector<ProductStep> plain;
  for (const auto& s : spec.steps) plain.push_back(s.step);
  if (schedule.kind == EpsilonSchedule::Kind::Iterated) {
    r.json["exact"] = exact_value_json(plain, spec.testform, schedule);
  } else if (schedule.kind == EpsilonSchedule::Kind::Diagonal) {
    r.json["lambda_diagonal"] = exact_value_json(plain, spec.testform, schedule);
  }
  r.plotdata = ladder_plot(res);
  return r;
}

Report run_cfl(const Json& p, const RunOptions& opt) {
  const int n = doc_n(p);
  const Json& f = field(p, "factors");
  if (!f.is_array() || f.empty()) fail("/factors", "expected a nonempty array");
  std::vector<CFLFactorSpec> specs;
  for (size_t i = 0; i < f.size(); ++i) specs.push_back(io::parse_cfl_factor(f[i], n, "/factors/" + std::to_string(i)));
  const TestForm phi = io::parse_testform(field(p, "testform"), n, "/testform");
  const GridSpec grid = parse_grid_opt(p, opt);
  const bool fixed = p.contains("epsilon");
  if (fixed && p.contains("schedule")) fail("/", "give either 'epsilon' or 'schedule'");
  if (fixed) {
    const auto eps = number_row(p["epsilon"], "/epsilon");
    if (eps.size() != specs.size()) fail("/epsilon", "expected one epsilon per factor");
    for (size_t i = 0; i < eps.size(); ++i) {
      if (!(eps[i] > 0) || !std::isfinite(eps[i])) fail("/epsilon", "epsilons must be positive");
      specs[i].epsilon = eps[i];
    }
  }
  const EpsilonSchedule schedule = schedule_or_default(p);
  const ExtrapolationConfig config = extrapolation_or_default(p);

  Report r;
  Json fj = Json::array();
  for (const auto& s : specs) {
    Json e;
    e["kind"] = s.kind == CFLFactorSpec::Kind::U ? "U" : "R";
    e["k"] = s.k;
    e["section"] = io::encode(s.section);
    fj.push_back(std::move(e));
  }
  r.json["factors"] = std::move(fj);
  if (fixed) {
    r.json["pairing"] = io::encode(cfl_pairing(specs, phi, grid));
  } else {
    const NumericalResult res = cfl_product_eval(specs, phi, schedule, config, grid);
    r.json["estimate"] = io::encode(res);
    r.plotdata = ladder_plot(res);
  }
  return r;
}

Report run_check(const Json& p, const RunOptions& opt) {
  CheckOptions co;
  co.seed = required_seed(p, opt);
  co.threads = opt.threads.value_or(1);
  const Json& s = field(p, "suite");
  if (!s.is_string()) fail("/suite", "expected a suite name");
  const std::string name = s.get<std::string>();
  const auto& names = check_suite_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) fail("/suite", "unknown suite '" + name + "'");
  if (p.contains("catalog_size")) {
    if (!p["catalog_size"].is_number_integer() || p["catalog_size"].get<int>() < 0) fail("/catalog_size", "expected >= 0");
    co.catalog_size = p["catalog_size"].get<int>();
  }
  if (p.contains("numeric_cases")) {
    if (!p["numeric_cases"].is_number_integer() || p["numeric_cases"].get<int>() < 0) fail("/numeric_cases", "expected >= 0");
    co.numeric_cases = p["numeric_cases"].get<int>();
  }
  Report r;
  const CheckSummary summary = check_suite(name, co);
  r.json["summary"] = summary.to_json();
  r.check_failed = !summary.passed();
  return r;
}

std::string hex64(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<Json> cache_load(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    return Json::parse(in);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void cache_store(const fs::path& file, const Json& report) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  if (ec) return;
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    out << report.dump();
  }
  fs::rename(tmp, file, ec);
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

ExperimentDoc parse_experiment(const Json& j) {
  if (!j.is_object()) fail("/", "expected an object");
  auto k = j.find("kind");
  if (k == j.end() || !k->is_string()) fail("/kind", "missing or not a string");
  ExperimentDoc doc;
  doc.kind = k->get<std::string>();
  if (!kinds().count(doc.kind)) fail("/kind", "unknown kind '" + doc.kind + "'");
  const auto allowed = allowed_fields(doc.kind);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "output") {
      const Json& o = it.value();
      if (!o.is_object()) fail("/output", "expected an object");
      for (auto ot = o.begin(); ot != o.end(); ++ot) {
        if (ot.key() != "json" && ot.key() != "csv" && ot.key() != "plotdata") {
          fail("/output", "unknown format '" + ot.key() + "'");
        }
        if (!ot.value().is_string() || ot.value().get<std::string>().empty()) fail("/output/" + ot.key(), "expected a file name");
        doc.outputs[ot.key()] = ot.value().get<std::string>();
      }
      continue;
    }
    if (!allowed.count(it.key())) fail("/" + it.key(), "unknown field for kind '" + doc.kind + "'");
    doc.payload[it.key()] = it.value();
  }
  return doc;
}

ExperimentDoc load_experiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return parse_experiment(j);
}

std::uint64_t content_hash(const std::string& kind, const Json& payload) {
  // Key-sorted dump, so field order in the document does not matter.
  const std::string text = std::string(kEngineVersion) + "\n" + kind + "\n" + nlohmann::json::parse(payload.dump()).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string default_cache_dir() {
  if (const char* d = std::getenv("RESIDUA_CACHE_DIR"); d && *d) return d;
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return (fs::path(x) / "residua").string();
  if (const char* h = std::getenv("HOME"); h && *h) return (fs::path(h) / ".cache" / "residua").string();
  return ".residua-cache";
}

Report run_report(const ExperimentDoc& doc, const RunOptions& opt, bool* cache_hit) {
  if (cache_hit) *cache_hit = false;
  Json payload = doc.payload;
  const auto seed = effective_seed(payload, opt);
  if (seed) payload["seed"] = *seed;
  const bool exact = doc.kind == "pair" || doc.kind == "mellin";
  const std::uint64_t hash = content_hash(doc.kind, payload);
  const fs::path cache_file = fs::path(opt.cache_dir.value_or(default_cache_dir())) / (hex64(hash) + ".json");

  Report r;
  r.kind = doc.kind;
  if (exact && opt.use_cache) {
    if (auto cached = cache_load(cache_file)) {
      if (cached->value("input_hash", "") == hex64(hash) && cached->value("input", Json()) == payload) {
        r.json = std::move(*cached);
        if (cache_hit) *cache_hit = true;
        return r;
      }
    }
  }

  Report body;
  if (doc.kind == "pair") {
    body = run_pair(payload);
  } else if (doc.kind == "mellin") {
    body = run_mellin(payload, required_seed(payload, opt));
  } else if (doc.kind == "sweep") {
    body = run_sweep(payload, opt);
  } else if (doc.kind == "limit") {
    body = run_limit(payload, opt);
  } else if (doc.kind == "cfl") {
    body = run_cfl(payload, opt);
  } else {
    body = run_check(payload, opt);
  }
  r.json["engine"] = kEngineVersion;
  r.json["kind"] = doc.kind;
  r.json["input_hash"] = hex64(hash);
  r.json["input"] = payload;
  r.json["result"] = std::move(body.json);
  r.csv_header = std::move(body.csv_header);
  r.csv_rows = std::move(body.csv_rows);
  r.plotdata = std::move(body.plotdata);
  r.check_failed = body.check_failed;
  if (exact && opt.use_cache) cache_store(cache_file, r.json);
  return r;
}

std::vector<std::string> emit_report(const Report& r, const std::map<std::string, std::string>& outputs,
                                     const std::string& out_dir) {
  auto target = [&](const char* format, const std::string& ext) {
    auto it = outputs.find(format);
    const std::string name = it != outputs.end() ? it->second : (r.kind.empty() ? "report" : r.kind) + ext;
    return fs::path(out_dir) / name;
  };
  std::vector<std::string> written;
  const Json body = r.json.is_null() ? Json::object() : r.json;
  const fs::path json_path = target("json", ".json");
  write_file(json_path, body.dump(2) + "\n");
  written.push_back(json_path.string());
  if (!r.csv_header.empty()) {
    std::string csv;
    for (size_t i = 0; i < r.csv_header.size(); ++i) csv += (i ? "," : "") + r.csv_header[i];
    csv += "\n";
    for (const auto& row : r.csv_rows) {
      for (size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + row[i];
      csv += "\n";
    }
    const fs::path p = target("csv", ".csv");
    write_file(p, csv);
    written.push_back(p.string());
  }
  if (!r.plotdata.empty()) {
    const fs::path p = target("plotdata", ".dat");
    write_file(p, r.plotdata);
    written.push_back(p.string());
  }
  return written;
}

RunOutcome run_experiment(const ExperimentDoc& doc, const RunOptions& opt) {
  RunOutcome out;
  out.report = run_report(doc, opt, &out.cache_hit);
  out.files = emit_report(out.report, doc.outputs, opt.out_dir);
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ParseError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 1;
  return 3;
}

}  // namespace residua
