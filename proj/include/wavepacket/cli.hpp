#pragma once

// Command-line front end: eval, verify, propagate, figures, scan.
//
// Exit codes: 0 success, 1 a verification invariant failed, 2 usage or
// parameter error, 3 numerical, domain or I/O failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace wavepacket::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// `args` excludes the program name. `--config file.json` may appear
/// anywhere; its keys are expanded to flags placed before the explicit ones,
/// so explicit flags win.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands a JSON object into "--key value" tokens. Booleans become bare
/// flags (false is dropped), arrays are joined with commas.
std::vector<std::string> config_to_args(const std::string& json_text);

}  // namespace wavepacket::cli
