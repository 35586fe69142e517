#pragma once

#include <ostream>

namespace metats {

/// Quick oracle-equivalence checks of the core routines. Prints one line per
/// check and returns true if all pass.
bool run_selftest(std::ostream& out);

} // namespace metats
