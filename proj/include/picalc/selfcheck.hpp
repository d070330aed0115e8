#ifndef PICALC_SELFCHECK_HPP
#define PICALC_SELFCHECK_HPP

#include <ostream>

namespace picalc {

// Built-in demonstrations and invariant checks: the probe constructions on
// the canonical frame pair, evidence replay, and the normal-form invariant
// suite over randomly generated correct processes. Prints one line per check
// and returns the number of failures.
int run_selftest(unsigned seed, std::ostream& os);

}  // namespace picalc

#endif
