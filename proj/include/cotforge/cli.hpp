#pragma once
// Command-line entry point.
//
// Subcommands: synthesize, build-tree, decompose, score, train-toy, eval.
// Exit codes: 0 success, 1 validation/usage errors, 2 provider or IO
// failures. Every successful command writes a run manifest recording the
// resolved config, seeds, input digests, output paths, and duration.

namespace cotforge::cli {

int run(int argc, const char* const* argv);

} // namespace cotforge::cli
