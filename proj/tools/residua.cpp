// Command line experiment runner. Exit codes: 0 ok, 1 i/o, 2 schema or usage, 3 engine,
// 4 failed check.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "residua/checks.hpp"
#include "residua/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tol;
  std::optional<std::uint64_t> budget;
  std::string out = ".";
  bool no_cache = false;
  std::string suite;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--seed", f.seed, "Seed; overrides the document");
  sub->add_option("--out", f.out, "Output directory")->capture_default_str();
  sub->add_option("--threads", f.threads, "Worker threads for quadrature")->check(CLI::PositiveNumber);
  sub->add_option("--tol", f.tol, "Relative grid tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--budget", f.budget, "Integrand evaluation budget");
  sub->add_flag("--no-cache", f.no_cache, "Ignore and do not write the result cache");
}

int run(const std::string& kind, const Flags& f) {
  using namespace residua;
  ExperimentDoc doc;
  if (!f.config.empty()) {
    doc = load_experiment(f.config);
    if (doc.kind != kind) throw SchemaError("document kind '" + doc.kind + "' given to the '" + kind + "' command");
  } else if (kind == "check") {
    io::Json j;
    j["kind"] = "check";
    j["suite"] = f.suite;
    doc = parse_experiment(j);
  } else {
    throw SchemaError("--config is required for '" + kind + "'");
  }
  if (kind == "check" && !f.suite.empty() && !f.config.empty() && doc.payload.value("suite", "") != f.suite) {
    throw SchemaError("suite argument differs from the document");
  }

  RunOptions opt;
  opt.seed = f.seed;
  if (kind == "check" && !opt.seed && !doc.payload.contains("seed")) opt.seed = CheckOptions{}.seed;
  opt.threads = f.threads;
  opt.tol = f.tol;
  opt.budget = f.budget;
  opt.out_dir = f.out;
  opt.use_cache = !f.no_cache;

  const RunOutcome out = run_experiment(doc, opt);
  if (out.cache_hit) std::cerr << "cache hit " << out.report.json.value("input_hash", "") << "\n";
  if (kind == "check") {
    const auto& s = out.report.json["result"]["summary"];
    for (const auto& item : s["items"]) {
      std::cout << (item["passed"].get<bool>() ? "PASS " : "FAIL ") << item["name"].get<std::string>() << "\n";
    }
    std::cout << s["suite"].get<std::string>() << ": " << (s["total"].get<int>() - s["failures"].get<int>()) << "/"
              << s["total"].get<int>() << " passed\n";
  }
  for (const auto& file : out.files) std::cout << "wrote " << file << "\n";
  return out.report.check_failed ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and numerical residue current experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", residua::kEngineVersion);
  Flags flags;
  std::string chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"pair", "Exact sequential product and its pairing with a test form"},
      {"mellin", "Lambda regularization: limits along paths and pole hyperplanes"},
      {"sweep", "Regularized integrals over a grid of epsilons"},
      {"limit", "Extrapolated limit along an epsilon schedule"},
      {"cfl", "Cauchy-Fantappie-Leray currents of holomorphic tuples"},
      {"check", "Named consistency suite: golden, triangle, poles, rates, bridge"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    if (std::string(name) == "check") {
      sub->add_option("suite", flags.suite, "Suite name")->check(CLI::IsMember(residua::check_suite_names()));
      sub->add_option("--config", flags.config, "Experiment document (JSON)");
    } else {
      sub->add_option("--config", flags.config, "Experiment document (JSON)")->required();
    }
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (chosen == "check" && flags.suite.empty() && flags.config.empty()) {
    std::cerr << "check: give a suite name or --config\n";
    return 2;
  }
  try {
    return run(chosen, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return residua::exit_code_for(e);
  }
}
