#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cli/emit.hpp"

namespace cannonball::cli {

enum class Command {
  Terms,
  Moments,
  Average,
  Sandwich,
  Discrepancy,
  Weyl,
  KnBound,
  Exceptional,
  NearHalf,
  Histogram,
  Optimize,
  Fit,
};

const char* to_string(Command c);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCheckpoint = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitHalted = 75;

struct RunConfig {
  Command command = Command::Terms;
  std::uint64_t lo = 1;  // --range lo:hi
  std::uint64_t hi = 0;
  std::uint64_t x = 0;
  unsigned k = 1;
  unsigned L = 10;
  std::vector<unsigned> Ks = {10};
  unsigned bins = 20;
  unsigned m_max = 10;
  unsigned bits = 96;
  unsigned workers = 1;
  std::uint64_t chunk = std::uint64_t{1} << 16;
  Format format = Format::Csv;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> checkpoint;
  std::uint64_t checkpoint_every = std::uint64_t{1} << 20;
  /// Stop with kExitHalted after the first checkpoint at or past this n.
  std::optional<std::uint64_t> halt_after;
  std::vector<std::uint64_t> xs;  // fit abscissae
  std::string exponent_spec;      // optimize: "F=x:5/2,K:-1/2;G=x:19/8,K:1/4"
  std::string variable = "K";
  std::string asymptotic = "x";
  bool chain = false;
  std::string chain_k = "1";

  /// Configuration values that determine the output, in a fixed layout.
  std::string canonical() const;
};

/// Parses argv. Returns the configuration, or the exit code to use when
/// parsing ended early (help requested or a usage error, already reported
/// on `out` / `err`).
std::variant<RunConfig, int> parse_args(int argc, const char* const* argv,
                                        std::ostream& out, std::ostream& err);

}  // namespace cannonball::cli
