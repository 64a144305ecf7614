#pragma once

// The specleak command line: subcommands over the library pipeline.
//
// Exit codes: 0 success without findings, 1 usage or input error,
// 2 leaks found.

#include <ostream>
#include <string>
#include <vector>

namespace specleak::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitLeaks = 2;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct OptionDoc {
  std::string command; // e.g. "ifg build"
  std::string flag;    // longest name, e.g. "--design"
  std::string description;
};

/// Every subcommand path that accepts options.
std::vector<std::string> commands();
/// Every option of every command, as declared.
std::vector<OptionDoc> options();
/// The `--help` text of a command ("" for the top level).
std::string help(const std::string& command);

} // namespace specleak::cli
