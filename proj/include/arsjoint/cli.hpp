#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arsjoint {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: ingest, retrieve, train, predict, evaluate, tune.
// args excludes the program name. Reports go to `out`, diagnostics and the
// resolved configuration to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arsjoint
