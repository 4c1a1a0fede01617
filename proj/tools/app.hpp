#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qe/judge.hpp"

namespace qe::tool {

/// Parses arguments and dispatches a subcommand. Precedence for judge
/// settings: command-line flags, then the --config file, then the
/// environment (QE_BACKEND_URL, QE_MODEL), then built-in defaults.
int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const JudgeEnvironment& env);

}  // namespace qe::tool
