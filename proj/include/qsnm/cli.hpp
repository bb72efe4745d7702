#pragma once

#include <string>
#include <vector>

namespace qsnm {

// Entry point behind the qsnm binary; argv[0] is the program name.
// Exit codes: 0 success, 1 at least one check failed, 2 usage error,
// 3 I/O, parse, degeneracy or evaluation-domain error.
int cli_main(std::vector<std::string> argv);

}  // namespace qsnm
