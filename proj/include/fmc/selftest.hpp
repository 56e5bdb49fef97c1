#pragma once

// The acceptance suite: nine timed checks covering typing goldens, the state
// example's normal forms, machine termination under the strong budget, exact
// weak step counting, measured reduction, confluence at small size, the
// equational theory against the machine oracle, the translation round trips,
// and the effect semantics of the strategy translations.  Each check prints
// one PASS/FAIL line; the return value is 0 when all pass and 1 otherwise.

#include <iosfwd>

namespace fmc {

int run_selftest(std::ostream& out);

}  // namespace fmc
