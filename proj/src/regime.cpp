#include "toeplab/regime.hpp"

#include <cmath>

namespace toeplab {

namespace {

double growth_term(int n, double delta, double r) {
    double one_minus = 1.0 - r;
    return n * std::pow(r, n - 1) * one_minus * one_minus / delta;
}

}  // namespace

RegimeReport regime_report(const SymbolParams& p, int n, double delta,
                           double r0, double threshold) {
    RegimeReport rep;
    rep.n = n;
    rep.delta = delta;
    rep.r0 = r0;
    rep.threshold = threshold;
    rep.r1 = std::sqrt(std::abs(p.ratio())) + 1.0 / kRegimeC;
    rep.term_growth = growth_term(n, delta, r0);
    rep.term_coupling = delta * double(n) * double(n) * double(n);
    rep.delta_floor_ok = delta >= std::exp(-double(n) / kRegimeFloorC);
    rep.r0_ok = r0 >= 1.0 / kRegimeC && r0 <= 1.0 - 1.0 / n;
    rep.pass = rep.term_growth + rep.term_coupling <= threshold &&
               rep.delta_floor_ok && rep.r0_ok;
    return rep;
}

double max_admissible_r0(const SymbolParams& p, int n, double delta,
                         double threshold) {
    (void)p;
    if (n < 2 || !(delta > 0)) {
        throw Infeasible("max_admissible_r0: need n >= 2 and delta > 0");
    }
    const double coupling = delta * double(n) * double(n) * double(n);
    const double budget = threshold - coupling;
    if (budget <= 0) {
        throw Infeasible("max_admissible_r0: delta n^3 already exceeds threshold");
    }
    const double top = 1.0 - 1.0 / n;
    if (growth_term(n, delta, top) <= budget) return top;

    // r -> r^{n-1}(1-r)^2 increases up to (n-1)/(n+1) and decreases beyond,
    // staying above its value at 1 - 1/n, so the crossing we want lies on
    // the increasing branch.
    const double peak = double(n - 1) / double(n + 1);
    double lo = 0.0, hi = std::min(peak, top);
    for (int it = 0; it < 80 && hi - lo > 1e-6; ++it) {
        double mid = 0.5 * (lo + hi);
        if (growth_term(n, delta, mid) <= budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (lo < 1.0 / kRegimeC) {
        throw Infeasible("max_admissible_r0: no admissible r0 >= 1/C");
    }
    return lo;
}

}  // namespace toeplab
