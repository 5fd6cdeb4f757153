#pragma once

namespace noisespec::cli {

/// Entry point of the `noisespec` executable. Exit codes: 0 success,
/// 1 runtime failure, 2 usage error.
int run(int argc, char** argv);

} // namespace noisespec::cli
