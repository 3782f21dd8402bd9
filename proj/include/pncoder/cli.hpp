#pragma once

namespace pncoder {

/// Entry point for the command-line tool. Returns the process exit code:
/// 0 success, 1 validation or usage failure, 2 provider failure, 3 partial
/// annotation runs. Every invocation writes a run manifest next to the
/// requested output.
int run_cli(int argc, char **argv);

} // namespace pncoder
