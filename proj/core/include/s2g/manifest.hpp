#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace s2g {

/// Library version string written into every manifest.
std::string code_version();

struct ManifestFile {
  std::string path;  // relative to the manifest's directory
  std::string hash;  // FNV-1a 64 of the bytes, 16 hex digits
};

struct ManifestRun {
  std::string name;            // guidance entry or experiment step
  std::string guidance;        // GuidanceSpec as JSON text, empty if none
  std::string metrics;         // MetricsReport as JSON text, empty if none
  std::uint64_t calls_strong = 0;
  std::uint64_t calls_weak = 0;
};

/// Provenance of one command invocation. Written as manifest.json next to
/// the artifacts it lists.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string code_version = s2g::code_version();
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> checkpoints;  // role -> content hash
  std::string sampling_mode;
  std::vector<ManifestRun> runs;
  std::vector<ManifestFile> files;
  double wall_time_s = 0.0;

  /// Hashes `dir/relative` and appends it to `files`.
  void add_file(const std::string& dir, const std::string& relative);
};

std::string to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);
void write_manifest(const std::string& dir, const RunManifest& manifest);
/// Reads dir/manifest.json. Throws IoError if it is missing.
RunManifest read_manifest(const std::string& dir);

}  // namespace s2g
