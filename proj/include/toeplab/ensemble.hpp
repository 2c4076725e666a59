#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "toeplab/density.hpp"
#include "toeplab/eig.hpp"
#include "toeplab/regime.hpp"
#include "toeplab/symbol.hpp"

namespace toeplab {

// Annulus r_inner < |zeta_-| < r_outer used to select eigenvalues.
struct AnnulusSpec {
    double r_inner = 0;
    double r_outer = 0;
};

struct EnsembleConfig {
    SymbolParams params;
    int n = 2;
    double delta = 0;
    int trials = 1;
    std::uint64_t seed = 1;
    AnnulusSpec region;
    GridSpec grid;
    int workers = 1;
    bool balance = true;
    double c1 = 2.0;  // truncation radius C1 * n for |Q|_HS
};

// The bidiagonal Toeplitz matrix: superdiagonal a, subdiagonal b. n >= 2.
Eigen::MatrixXcd build_toeplitz(const SymbolParams& p, int n);

// Exact unperturbed spectrum z(nu) = 2 sqrt(ab) cos(pi nu / (n+1)), nu=1..n.
std::vector<Complex> unperturbed_spectrum(const SymbolParams& p, int n);

// n x n matrix of i.i.d. complex Gaussians with E q = 0, E |q|^2 = 1,
// deterministic given (seed, trial_index). Trials use independent streams
// derived as seed ^ hash(trial_index).
Eigen::MatrixXcd draw_gaussian(int n, std::uint64_t seed, int trial_index);

// Hilbert-Schmidt (Frobenius) norm.
double hs_norm(const Eigen::MatrixXcd& q);

struct SpectrumSample {
    int trial_index = 0;
    std::vector<Complex> eigenvalues;  // n entries with multiplicity
    double hs_norm_q = 0;
    bool truncated = false;  // |Q|_HS > c1 * n
};

// Draws Q for one trial, forms P + delta Q and solves it. Truncated trials
// skip the solve (they contribute zero counts downstream).
SpectrumSample run_single_trial(const EnsembleConfig& cfg, int trial_index);

struct TrialSummary {
    int trial_index = 0;
    double hs_norm_q = 0;
    bool truncated = false;
    bool aborted = false;    // eigensolver failure; excluded from averages
    int eig_count = 0;       // eigenvalues produced before region filtering
    int count_in_region = 0; // eigenvalues binned into masked cells
};

struct EmpiricalIntensity {
    GridSpec grid;
    std::vector<std::uint8_t> mask;   // cell-center annulus membership
    std::vector<double> mean_counts;  // per-cell average count per trial
    std::vector<double> var_counts;   // per-cell sample variance
    double total_mean = 0;            // sum of masked mean_counts
    double total_var = 0;             // sample variance of per-trial totals
    int trials_used = 0;

    double total_stderr() const;
};

struct EnsembleResult {
    EmpiricalIntensity intensity;
    std::vector<TrialSummary> trials;
    int truncated_trials = 0;
    int aborted_trials = 0;
    std::optional<RegimeReport> regime;  // advisory; empty when delta == 0
};

// Monte Carlo estimate of the empirical eigenvalue intensity over the masked
// annulus cells. Truncated trials contribute zero counts but stay in the
// average (the indicator sits inside the expectation); aborted trials are
// excluded and reported. Aggregation runs in fixed trial order, so the
// result is bitwise independent of the worker count.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

struct PhiSpec {
    enum class Kind { AnnulusIndicator, SmoothedAnnulus, RadialBump };
    Kind kind = Kind::AnnulusIndicator;
    double width = 0;       // ramp width (smoothed annulus) or bump radius
    Complex center = 0;     // bump center
    double amplitude = 1;   // bump amplitude
};

struct LinearStatistic {
    double mean = 0;
    double std_error = 0;
};

// Monte Carlo mean of sum_lambda phi(lambda) over trials and its standard
// error. The annulus indicator uses the same cell-mask membership as
// run_ensemble, so it reproduces total_mean exactly.
LinearStatistic linear_statistic(const EnsembleConfig& cfg, const PhiSpec& phi);

}  // namespace toeplab
