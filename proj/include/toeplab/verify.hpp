#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toeplab/density.hpp"
#include "toeplab/symbol.hpp"

namespace toeplab {

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0;       // worst error / out-of-bracket measure
    Complex worst_z = 0;    // sample where it occurred
    int worst_n = 0;
    std::string detail;
};

struct VerifyOptions {
    SymbolParams params;
    std::vector<int> n_list{2, 8, 32, 128};
    int samples = 100;
    double tol = 1e-6;
    std::uint64_t seed = 12345;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
};

// Runs the whole identity suite: branch-pair relations, the Gram identity,
// its lower bound, the order-of-magnitude bracket, the closed form of K
// against the truncated series, and the roots of g_0 against the analytic
// spectrum.
VerifyReport run_verify_suite(const VerifyOptions& opts);

}  // namespace toeplab
