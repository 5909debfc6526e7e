#pragma once

// Command-line front end. Kept as a library so tests can drive it in-process.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fama::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O failure or replay mismatch
inline constexpr int kExitDomain = 2;   // bad flags or out-of-domain parameters
inline constexpr int kExitConvergence = 3;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a of `data`, rendered as "fnv1a64:<16 hex digits>".
std::string digest(std::string_view data);

struct Grid {
  std::string axis;
  std::vector<double> values;
};

/// Parses "axis=start:stop:step" (inclusive) or "axis=value".
Grid parse_sweep(const std::string& text);

/// Parses a positive integer that may be written in scientific form ("1e6").
std::uint64_t parse_count(const std::string& text);

}  // namespace fama::cli
