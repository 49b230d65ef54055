#pragma once

// Command dispatch for the w2s tool.
//
// Exit status: 0 ok, 1 usage, 2 configuration, 3 data / io, 4 numerical.

#include <iosfwd>
#include <string>
#include <vector>

namespace w2s {

int exit_code_for(const std::exception& e) noexcept;

/// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace w2s
