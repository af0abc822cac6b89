#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gepey {

struct CheckResult {
    bool pass = false;
    std::string name;
    std::string detail;
};

// Property suites behind the verify subcommand. Suites: oracle (random
// pencils against the dense solver and the loss optimum identity),
// equivalence (trained two-view representations against the exact solution),
// collapse (closed-form thresholds and low-dimensional scans), interlace
// (projected spectra never exceed the originals). Throws ConfigInvalid for
// an unknown suite name.
std::vector<CheckResult> verify_suite(const std::string& suite, std::uint64_t seed);

}  // namespace gepey
