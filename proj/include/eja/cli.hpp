#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eja::cli {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

/// `eja verify|solve|demo ...`; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Subcommand entry points; args exclude the program and subcommand names.
int cmd_verify(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_solve(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_demo(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eja::cli
