#pragma once

namespace coachsim::cli {

/// Entry point for the coachsim command-line tool.
/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace coachsim::cli
