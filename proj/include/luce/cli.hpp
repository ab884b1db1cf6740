#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace luce::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kNumericalFailure = 2,
  kPreconditionViolation = 3,
};

/// Environment variable naming the directory for run manifests.
inline constexpr const char* kOutputDirEnv = "LUCE_OUTPUT_DIR";

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics and the seed log to `err`. A run manifest is written next to
/// the output unless --no-manifest is given.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Nine significant digits, shortest form ("%.9g").
std::string format_number(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads the tool's CSV: comma separated, header row, optional double quotes.
CsvTable parse_csv(std::string_view text);

} // namespace luce::cli
