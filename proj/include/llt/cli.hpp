#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace llt {

/// Environment variable naming the default key=value config file.
inline constexpr const char* kConfigEnvVar = "LLT_CONFIG";

/// Exit codes: 0 success, 1 usage or runtime error, 2 invariant-audit failure.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_subcommand(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace llt
