#pragma once

namespace nlcl {

/// Entry point of nlcl-run. Exit codes: 0 success, 2 invalid config or
/// arguments, 1 runtime failure.
int run_cli(int argc, char** argv);

}  // namespace nlcl
