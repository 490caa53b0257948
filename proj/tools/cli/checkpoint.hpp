#pragma once

// Resumable state for long reductions. A checkpoint is a small canonical
// JSON document:
//
//   {"schema_version": 1, "command": "moments", "fingerprint": "9f0c...",
//    "last_n": 65536, "accumulators": [{"name": "M_k", "value": "1234"}]}
//
// `fingerprint` hashes every configuration value that affects the output;
// a checkpoint whose fingerprint differs from the current run is refused.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cannonball::cli {

inline constexpr int kCheckpointSchema = 1;

struct Accumulator {
  std::string name;
  std::string value;  // decimal integer

  bool operator==(const Accumulator&) const = default;
};

struct Checkpoint {
  int schema_version = kCheckpointSchema;
  std::string command;
  std::string fingerprint;
  std::uint64_t last_n = 0;
  std::vector<Accumulator> accumulators;

  bool operator==(const Checkpoint&) const = default;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a of the canonical configuration string, as 16 hex digits.
std::string fingerprint(std::string_view canonical);

std::string serialize(const Checkpoint& cp);
Checkpoint parse_checkpoint(std::string_view text);

/// Writes to a sibling temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);

/// std::nullopt when the file does not exist; CheckpointError when it exists
/// but is unreadable, malformed or from another schema version.
std::optional<Checkpoint> load_checkpoint(const std::filesystem::path& path);

}  // namespace cannonball::cli
