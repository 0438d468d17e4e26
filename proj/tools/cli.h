#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "psgdct/spectral.h"

namespace psgdct::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs the psgdct command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Comma-separated rows, one per line; blank lines and '#' comments skipped.
// Throws ParseError with the offending line number.
RealMatrix parse_text_matrix(const std::string& text);
std::string format_text_matrix(const RealMatrix& m);

}  // namespace psgdct::cli
