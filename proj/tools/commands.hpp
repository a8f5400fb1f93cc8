#pragma once

namespace ptosis::cli {

// Exit codes are part of the CLI contract: 0 success, 2 input/schema error,
// 3 computation/degenerate-fit error, 4 IO error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitComputation = 3;
inline constexpr int kExitIo = 4;

int run(int argc, char** argv);

}  // namespace ptosis::cli
