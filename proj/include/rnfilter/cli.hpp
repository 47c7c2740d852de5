#pragma once

namespace rnf {

/// Entry point behind the rnfilter binary. Exit codes: 0 success, 1 usage
/// error (bad flags, missing or malformed input files, violated
/// preconditions), 2 numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace rnf
