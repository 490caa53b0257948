#pragma once

#include <iosfwd>

#include "cli/config.hpp"

namespace cannonball::cli {

inline constexpr int kExitFailure = 1;

/// Executes one command. Results go to `cfg.out` when set, otherwise to
/// `out`; diagnostics go to `err`. Returns a process exit status.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args followed by run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cannonball::cli
