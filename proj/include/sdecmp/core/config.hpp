#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdecmp/core/drift.hpp"
#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/test_function.hpp"
#include "sdecmp/core/time_grid.hpp"

namespace sdecmp {

/// Axis-aligned box [lo_1, hi_1] x ... x [lo_n, hi_n].
struct Box {
  std::vector<std::pair<double, double>> bounds;

  std::size_t dim() const { return bounds.size(); }
  bool contains(std::span<const double> x) const;
};

struct NovikovSettings {
  double se_ratio = 0.1;     // warn when SE / estimate exceeds this
  double warn_share = 0.01;  // max single-path share of the total
  double fail_share = 0.1;
  std::vector<std::vector<double>> probe_points;  // checked in addition to x0
};

struct CompareSettings {
  std::vector<double> times;  // empty: {T/2, T}
  double tolerance = 0.02;
  std::size_t bootstrap = 500;
  double slack = 1e-12;
  std::size_t quasi_monotone_probes = 4096;
  double quasi_monotone_tol = 1e-12;
  std::vector<double> thresholds = {1e1, 1e2, 1e3, 1e4};
  double ess_floor = 100.0;
  bool filtration_equal = true;  // assumed, never checked; recorded in the report
};

struct ScalingSettings {
  double anchor = 0.0;            // time s of the left endpoint
  std::vector<std::size_t> lags;  // in steps; empty: 6 lags spanning a decade
};

/// Everything one CLI run consumes.
struct ExperimentConfig {
  DriftSpec drift;
  std::vector<double> x0;
  TimeGrid grid{1.0, 256};
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  std::size_t chunk_size = kDefaultChunkSize;
  std::size_t workers = 0;
  Box box;
  std::size_t resolution = 1025;
  std::vector<TestFunction> test_functions;
  std::filesystem::path output_dir = "out";

  NovikovSettings novikov;
  CompareSettings compare;
  ScalingSettings scaling;
  std::optional<LinearDrift> linear_bound;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sdecmp
