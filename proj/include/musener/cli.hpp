#pragma once

#include <iosfwd>
#include <string_view>

namespace musener::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Environment variable naming the default gazetteer directory.
inline constexpr std::string_view kGazetteerEnv = "MUSENER_GAZETTEER_DIR";

// Runs one subcommand. Reports go to `out`, diagnostics and usage text to
// `err`. Returns 0 on success, 1 on usage errors, 2 on data errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace musener::cli
