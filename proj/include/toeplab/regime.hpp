#pragma once

#include "toeplab/symbol.hpp"

namespace toeplab {

// The constants C >> 1 of the parameter range are not necessarily equal.
// kRegimeC enters the inner radius r1 = sqrt(|b/a|) + 1/C and the lower
// bound r0 >= 1/C; kRegimeFloorC enters the coupling floor delta >= e^{-n/C},
// where a smaller C is needed to keep the floor below desk-scale couplings
// (n = 101 with delta = 1e-8 must be admissible).
inline constexpr double kRegimeC = 10.0;
inline constexpr double kRegimeFloorC = 5.0;

// Default reading of "<< 1" for the smallness condition.
inline constexpr double kRegimeThreshold = 0.2;

struct RegimeReport {
    int n = 0;
    double delta = 0;
    double r0 = 0;
    double r1 = 0;             // sqrt(|b/a|) + 1/C
    double term_growth = 0;    // n r0^{n-1} (1 - r0)^2 / delta
    double term_coupling = 0;  // delta n^3
    bool delta_floor_ok = false;  // delta >= e^{-n/kRegimeFloorC}
    bool r0_ok = false;           // 1/C <= r0 <= 1 - 1/n
    double threshold = kRegimeThreshold;
    bool pass = false;
};

// Evaluates the parameter-range conditions. Never throws: out-of-range
// inputs produce a failing verdict (possibly with infinite terms).
RegimeReport regime_report(const SymbolParams& p, int n, double delta,
                           double r0, double threshold = kRegimeThreshold);

// Largest r0 <= 1 - 1/n with term_growth(r0) + term_coupling <= threshold,
// found by bisection (to 1e-6) on the interval where r -> r^{n-1}(1-r)^2
// increases. Throws Infeasible when no r0 >= 1/C qualifies.
double max_admissible_r0(const SymbolParams& p, int n, double delta,
                         double threshold = kRegimeThreshold);

}  // namespace toeplab
