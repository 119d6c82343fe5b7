#include "s2g/manifest.hpp"

#include <filesystem>

#include <json.hpp>

#include "s2g/csv.hpp"
#include "s2g/error.hpp"
#include "s2g/hash.hpp"

namespace s2g {

using ojson = nlohmann::ordered_json;

std::string code_version() { return "0.1.0"; }

void RunManifest::add_file(const std::string& dir, const std::string& relative) {
  const auto full = (std::filesystem::path(dir) / relative).string();
  files.push_back({relative, hex64(hash_file(full))});
}

std::string to_json(const RunManifest& m) {
  ojson j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["code_version"] = m.code_version;
  j["seeds"] = ojson::object();
  for (const auto& [k, v] : m.seeds) j["seeds"][k] = v;
  j["checkpoints"] = ojson::object();
  for (const auto& [k, v] : m.checkpoints) j["checkpoints"][k] = v;
  if (!m.sampling_mode.empty()) j["sampling_mode"] = m.sampling_mode;
  j["runs"] = ojson::array();
  for (const auto& r : m.runs) {
    ojson e;
    e["name"] = r.name;
    if (!r.guidance.empty()) e["guidance"] = ojson::parse(r.guidance);
    if (!r.metrics.empty()) e["metrics"] = ojson::parse(r.metrics);
    e["calls"] = {{"strong", r.calls_strong}, {"weak", r.calls_weak}};
    j["runs"].push_back(e);
  }
  j["files"] = ojson::array();
  for (const auto& f : m.files) j["files"].push_back({{"path", f.path}, {"hash", f.hash}});
  j["wall_time_s"] = m.wall_time_s;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  RunManifest m;
  try {
    const auto j = ojson::parse(text);
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    for (const auto& [k, v] : j.at("seeds").items()) m.seeds[k] = v.get<std::uint64_t>();
    for (const auto& [k, v] : j.at("checkpoints").items()) m.checkpoints[k] = v.get<std::string>();
    if (j.contains("sampling_mode")) m.sampling_mode = j.at("sampling_mode").get<std::string>();
    for (const auto& e : j.at("runs")) {
      ManifestRun r;
      r.name = e.at("name").get<std::string>();
      if (e.contains("guidance")) r.guidance = e.at("guidance").dump();
      if (e.contains("metrics")) r.metrics = e.at("metrics").dump(2);
      r.calls_strong = e.at("calls").at("strong").get<std::uint64_t>();
      r.calls_weak = e.at("calls").at("weak").get<std::uint64_t>();
      m.runs.push_back(std::move(r));
    }
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("hash").get<std::string>()});
    m.wall_time_s = j.at("wall_time_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest.json", 0, e.what());
  }
  return m;
}

void write_manifest(const std::string& dir, const RunManifest& manifest) {
  csv::write_file((std::filesystem::path(dir) / "manifest.json").string(), to_json(manifest));
}

RunManifest read_manifest(const std::string& dir) {
  return manifest_from_json(csv::read_file((std::filesystem::path(dir) / "manifest.json").string()));
}

}  // namespace s2g
