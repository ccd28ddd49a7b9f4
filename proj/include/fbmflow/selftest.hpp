#pragma once

#include <ostream>

namespace fbmflow::selftest {

struct Options {
  /// Dev-mode negative control: run with a tampered k1.
  bool mutate_k1 = false;
};

/// Reduced-size property suite. Prints one line per property and returns the
/// number of failures.
int run(const Options& options, std::ostream& out);

}  // namespace fbmflow::selftest
