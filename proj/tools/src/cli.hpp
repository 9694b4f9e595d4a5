#pragma once

// Batch scenario runner behind the eonplan executable.

#include <filesystem>
#include <iosfwd>
#include <string>

namespace eon::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kParse = 4,
  kInfeasible = 5,
  kNumerical = 6,
  kInvalid = 7,
};

/// Directory holding the bundled inputs: $EON_DATA_DIR if set, else the
/// build-time default.
std::filesystem::path data_dir();

/// Maps the bundled aliases (cost239, table2, table3) to files; any other
/// name is returned unchanged.
std::filesystem::path resolve_input(const std::string& name);

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eon::cli
