#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nextkey::cli {

/// Runs the command line. Exit codes: 0 success, 1 I/O or validation error,
/// 2 usage error. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace nextkey::cli
