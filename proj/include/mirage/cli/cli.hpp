#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mirage::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // ciphers-kat verdict only
  kExitConfigError = 2,
  kExitCapacityViolation = 3,
  kExitIoError = 4,
};

// args[0] is the program name. Normal output goes to `out`, diagnostics to
// `err`.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int parse_and_dispatch(int argc, const char* const* argv);

// "1000000", "1e6", "2.5e3". Throws ConfigError on fractions, negatives and
// overflow.
std::uint64_t parse_count(std::string_view text);

// "1048576", "1M", "1MB", "1MiB", "512K", "2G" (binary multiples).
std::uint64_t parse_size_bytes(std::string_view text);

}  // namespace mirage::cli
