#pragma once

// Batch experiments: a JSON document names an engine (pair, mellin, sweep, limit, cfl, check)
// and its payload; running it produces a JSON report plus CSV and plot data where meaningful.
// Reports contain no timestamps or paths, so identical (document, seed, version) triples give
// byte-identical files.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "residua/io.hpp"

namespace residua {

extern const char* const kEngineVersion;

struct ExperimentDoc {
  std::string kind;
  /// The document without "output"; this is what the content hash covers.
  io::Json payload;
  /// Format ("json", "csv", "plotdata") to file name relative to the output directory.
  std::map<std::string, std::string> outputs;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tol;
  std::optional<std::uint64_t> budget;
  std::string out_dir = ".";
  /// Overrides RESIDUA_CACHE_DIR and the default location.
  std::optional<std::string> cache_dir;
  bool use_cache = true;
};

struct Report {
  std::string kind;
  io::Json json;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  std::string plotdata;
  /// Set by check documents whose suite failed.
  bool check_failed = false;
};

struct RunOutcome {
  Report report;
  std::vector<std::string> files;
  bool cache_hit = false;
};

/// Throws SchemaError.
ExperimentDoc parse_experiment(const io::Json& j);
/// Throws IoError when unreadable, SchemaError when malformed.
ExperimentDoc load_experiment(const std::string& path);

/// Validates the whole payload before any engine runs, so SchemaError always precedes engine
/// errors. Exact kinds (pair, mellin) are cached by content hash.
Report run_report(const ExperimentDoc& doc, const RunOptions& opt, bool* cache_hit = nullptr);
/// run_report followed by emit_report.
RunOutcome run_experiment(const ExperimentDoc& doc, const RunOptions& opt);

/// Writes the JSON report, the CSV when the report has a header, and plot data when present.
/// Returns the written paths; throws IoError.
std::vector<std::string> emit_report(const Report& r, const std::map<std::string, std::string>& outputs,
                                     const std::string& out_dir);

/// FNV-1a 64 over the engine version, the kind and the key-sorted payload.
std::uint64_t content_hash(const std::string& kind, const io::Json& payload);

/// Cache directory: RESIDUA_CACHE_DIR, else $XDG_CACHE_HOME/residua, else $HOME/.cache/residua.
std::string default_cache_dir();

/// 0 ok, 2 schema, 3 engine, 1 i/o.
int exit_code_for(const std::exception& e);

}  // namespace residua
