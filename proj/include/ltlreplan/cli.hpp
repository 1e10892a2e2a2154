#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ltlreplan::cli {

enum class LogLevel { Off, Info, Debug };

/// "off", "info" or "debug"; throws std::invalid_argument otherwise.
LogLevel parse_log_level(const std::string& text);
/// Reads LTLREPLAN_LOG; unset means Info.
LogLevel log_level_from_env();

/// Runs one subcommand (args exclude the program name).
/// Returns 0 on success, 1 when the run fails, 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltlreplan::cli
