#pragma once

namespace tomocg::cli {

/// Entry point for the tomocg command line tool; dispatches the
/// gen-povm | simulate | mwe | estimate | run | summarize subcommands.
int cli_main(int argc, char** argv);

}  // namespace tomocg::cli
