#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gcs::cli {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

/// Runs one `gcs` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gcs::cli
