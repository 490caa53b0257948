#include "cli/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cannonball::cli {

std::string fingerprint(std::string_view canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string serialize(const Checkpoint& cp) {
  nlohmann::ordered_json j;
  j["schema_version"] = cp.schema_version;
  j["command"] = cp.command;
  j["fingerprint"] = cp.fingerprint;
  j["last_n"] = cp.last_n;
  j["accumulators"] = nlohmann::ordered_json::array();
  for (const auto& acc : cp.accumulators) {
    nlohmann::ordered_json a;
    a["name"] = acc.name;
    a["value"] = acc.value;
    j["accumulators"].push_back(std::move(a));
  }
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  Checkpoint cp;
  try {
    cp.schema_version = j.at("schema_version").get<int>();
    if (cp.schema_version != kCheckpointSchema) {
      throw CheckpointError("checkpoint schema version " + std::to_string(cp.schema_version) +
                            " is not supported (expected " +
                            std::to_string(kCheckpointSchema) + ")");
    }
    cp.command = j.at("command").get<std::string>();
    cp.fingerprint = j.at("fingerprint").get<std::string>();
    cp.last_n = j.at("last_n").get<std::uint64_t>();
    for (const auto& a : j.at("accumulators")) {
      cp.accumulators.push_back({a.at("name").get<std::string>(), a.at("value").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("incomplete checkpoint: ") + e.what());
  }
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out << serialize(cp);
    if (!out) throw CheckpointError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place: " + ec.message());
}

std::optional<Checkpoint> load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace cannonball::cli
