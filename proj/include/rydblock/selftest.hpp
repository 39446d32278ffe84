#pragma once

#include <iosfwd>

namespace rydblock {

// Release checklist covering the full pipeline: basis enumeration, level
// structure, the averaged blockade numbers, interaction scaling laws, the
// experiment simulation benchmarks, and the numerical property suite. Prints
// one PASS/FAIL line per check with the measured value and returns the number
// of failures. Exceptions inside a check mark it failed and the run
// continues, so one broken stage cannot hide the state of the others.
int run_selftest(std::ostream& out);

} // namespace rydblock
