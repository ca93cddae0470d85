#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdecmp/core/csv.hpp"

namespace sdecmp {

inline constexpr std::string_view kVersion = "0.3.0";

std::string sha256_hex(std::string_view data);

struct OutputFile {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string command;
  /// SHA-256 over command, config text and effective seed; equal inputs give equal hashes.
  std::string config_hash;
  std::string config_path;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> module_versions;
  std::string started_at;
  std::string finished_at;
  std::string status = "running";  // running, complete
  std::optional<int> exit_code;
  std::vector<OutputFile> files;

  nlohmann::ordered_json to_json() const;
};

/// Output directory of one run: manifest.json, reports/, csv/.
/// The manifest is written on construction and rewritten by finish(), so
/// an interrupted run is left with status "running".
class RunWriter {
 public:
  RunWriter(std::filesystem::path root, RunManifest manifest);

  void write_csv(const std::string& name, const CsvTable& table);
  void write_report(const std::string& name, const nlohmann::ordered_json& report);
  void finish(int exit_code);

  const std::filesystem::path& root() const { return root_; }
  const RunManifest& manifest() const { return manifest_; }

 private:
  void write_file(const std::string& relative, const std::string& content);
  void write_manifest() const;

  std::filesystem::path root_;
  RunManifest manifest_;
};

}  // namespace sdecmp
