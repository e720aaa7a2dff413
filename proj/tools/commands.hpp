#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lkplo::cli {

// Runs the lkplo command line; args excludes the program name. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lkplo::cli
