#pragma once

namespace sic {

// Command-line front end: train / eval / probe / heatmap / sweep /
// theory-check. Returns the process exit code; every toolkit error is
// reported on stderr and mapped to a nonzero code instead of escaping.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace sic
