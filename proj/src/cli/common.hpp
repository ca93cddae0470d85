#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdecmp/cli/cli.hpp"
#include "sdecmp/cli/output.hpp"
#include "sdecmp/compare/compare.hpp"
#include "sdecmp/core/config.hpp"
#include "sdecmp/drift_analysis/envelope.hpp"
#include "sdecmp/girsanov/girsanov.hpp"

namespace sdecmp::cli {

using Json = nlohmann::ordered_json;

struct Run {
  ExperimentConfig cfg;
  std::size_t workers = 1;
  RunWriter writer;
};

/// Loads the config, applies overrides and opens the output directory.
Run open_run(const std::string& command, const std::string& config_text, const std::string& config_path,
             const RunOptions& options);
Run open_run(const std::string& command, const std::filesystem::path& config, const RunOptions& options);

Json to_json(const EstimateWithCI& e);
Json to_json(const NovikovEstimate& e);
Json to_json(const WeightDiagnostics& d);
Json to_json(const QuasiMonotoneReport& r);
Json to_json(const DominanceReport& r);
Json to_json(const PathwiseStats& s);
Json to_json(const ExplosionInfo& e);
Json number(double v);  // null for non-finite values

/// Novikov check at x0 and the configured probes; writes novikov.json/.csv.
Verdict run_novikov(Run& run, const DriftFn& drift, std::ostream& out);

/// Writes per-component envelope tables and the axis profile through x0.
void write_envelope(Run& run, const DriftFn& drift, const EnvelopeDrift& env);

/// Per-knot quantiles (5, 25, 50, 75, 95 percent) of every coordinate.
CsvTable path_quantiles(const PathBatch& paths);
CsvTable explosion_table(const ExplosionInfo& e);

}  // namespace sdecmp::cli
