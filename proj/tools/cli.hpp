#pragma once

namespace pivotlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// The `pivotlab` command line. Returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace pivotlab
