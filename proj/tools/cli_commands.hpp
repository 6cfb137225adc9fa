#pragma once
// The fhbandit command line, exposed as a function so tests can drive the
// exact production code paths without spawning processes.
//
//   fhbandit solve    --instance FILE [--output FILE] [--epsilon X] [--regime R]
//   fhbandit simulate --instance FILE --solution FILE [--episodes N] [--seed S]
//                     [--threads T] [--output FILE] [--csv FILE]
//   fhbandit bench    --suite FILE [--episodes N] [--seed S] [--threads T]
//                     [--output FILE]
//
// Exit codes: 0 success, 1 a bench row failed its ratio threshold, 2 input or
// usage error.  All randomness derives from --seed; results are bit-identical
// across runs and thread counts (wall_time_s in result records is the only
// non-deterministic field).

#include <iosfwd>
#include <string>
#include <vector>

namespace fhbandit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBenchFail = 1;
inline constexpr int kExitInputError = 2;

// Runs the CLI on `args` (program name excluded).  Normal output goes to
// `out`, diagnostics to `err`; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fhbandit::cli
