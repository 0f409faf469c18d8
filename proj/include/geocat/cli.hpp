#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "geocat/errors.hpp"
#include "geocat/phase_maps.hpp"

namespace geocat::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kParseError = 2,
  kDomainError = 3,
  kAllCensored = 4,
  kIoError = 5,
};

/// Malformed user input (numbers, ranges, flags).
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Decimal or exact rational `num/den`; the whole token must be consumed.
double parse_number(std::string_view text);

/// `lo:hi:n` with inclusive endpoints and n >= 2 points.
GridRange parse_range(std::string_view text);

/// Parses `args` (args[0] is the program name), runs the subcommand and
/// returns the process exit code. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geocat::cli
