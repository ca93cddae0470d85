#include "sdecmp/cli/output.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <openssl/evp.h>

#include "sdecmp/core/errors.hpp"

namespace sdecmp {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ResourceError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw ResourceError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["config_path"] = config_path;
  j["seed"] = seed;
  j["module_versions"] = module_versions;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(finished_at);
  j["status"] = status;
  j["exit_code"] = exit_code ? nlohmann::ordered_json(*exit_code) : nlohmann::ordered_json();
  auto& files_json = j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) files_json.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return j;
}

RunWriter::RunWriter(std::filesystem::path root, RunManifest manifest)
    : root_(std::move(root)), manifest_(std::move(manifest)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "reports", ec);
  std::filesystem::create_directories(root_ / "csv", ec);
  if (ec) throw ResourceError("cannot create output directory '" + root_.string() + "': " + ec.message());
  manifest_.started_at = utc_now();
  manifest_.status = "running";
  write_manifest();
}

void RunWriter::write_file(const std::string& relative, const std::string& content) {
  write_text(root_ / relative, content);
  manifest_.files.push_back({relative, sha256_hex(content), content.size()});
}

void RunWriter::write_csv(const std::string& name, const CsvTable& table) {
  write_file("csv/" + name, table.str());
}

void RunWriter::write_report(const std::string& name, const nlohmann::ordered_json& report) {
  write_file("reports/" + name, report.dump(2) + "\n");
}

void RunWriter::finish(int exit_code) {
  manifest_.finished_at = utc_now();
  manifest_.status = "complete";
  manifest_.exit_code = exit_code;
  write_manifest();
}

void RunWriter::write_manifest() const {
  write_text(root_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
}

}  // namespace sdecmp
