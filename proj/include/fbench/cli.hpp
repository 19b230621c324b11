#pragma once

#include <iosfwd>

namespace fbench {

/// Runs one subcommand. Returns 0 on success, 2 on usage or validation
/// errors and 1 on runtime errors; diagnostics go to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbench
