#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crop::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kConfigError = 3,
  kResourceError = 4,
};

/// Entry point of the `crop` tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int main(int argc, char** argv);

}  // namespace crop::cli
