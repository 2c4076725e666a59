#include "toeplab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "parallel.hpp"

namespace toeplab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

void validate(const EnsembleConfig& cfg) {
    if (cfg.n < 2) throw DimensionTooSmall("ensemble: n must be >= 2");
    if (cfg.trials < 1) throw std::invalid_argument("ensemble: trials must be >= 1");
    if (cfg.delta < 0) throw std::invalid_argument("ensemble: delta must be >= 0");
}

double smoothstep(double x) {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    return x * x * (3 - 2 * x);
}

struct TrialPayload {
    TrialSummary summary;
    std::vector<std::int32_t> cells;  // masked cell per selected eigenvalue
    double phi_sum = 0;
};

}  // namespace

Eigen::MatrixXcd build_toeplitz(const SymbolParams& p, int n) {
    if (n < 2) throw DimensionTooSmall("build_toeplitz: n must be >= 2");
    // The coefficients keep their user-given roles: normalization is an
    // analysis convention, and P vs its transpose matters to the raw
    // eigensolver even though the spectra coincide.
    const Complex super = p.swapped ? p.b : p.a;
    const Complex sub = p.swapped ? p.a : p.b;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j + 1 < n; ++j) {
        m(j, j + 1) = super;
        m(j + 1, j) = sub;
    }
    return m;
}

std::vector<Complex> unperturbed_spectrum(const SymbolParams& p, int n) {
    if (n < 1) throw std::invalid_argument("unperturbed_spectrum: n must be >= 1");
    Complex c = focal_points(p).first;  // 2 sqrt(ab)
    std::vector<Complex> z(n);
    for (int nu = 1; nu <= n; ++nu) {
        z[nu - 1] = c * std::cos(kPi * nu / (n + 1));
    }
    return z;
}

Eigen::MatrixXcd draw_gaussian(int n, std::uint64_t seed, int trial_index) {
    std::mt19937_64 eng(seed ^ splitmix64(std::uint64_t(trial_index)));
    Eigen::MatrixXcd q(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            // |q|^2 ~ Exp(1), phase uniform: the complex Gaussian N_C(0,1)
            double u1 = double((eng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
            double u2 = double(eng() >> 11) * 0x1.0p-53;        // [0, 1)
            double r = std::sqrt(-std::log(u1));
            q(j, k) = std::polar(r, 2 * kPi * u2);
        }
    }
    return q;
}

double hs_norm(const Eigen::MatrixXcd& q) { return q.norm(); }

SpectrumSample run_single_trial(const EnsembleConfig& cfg, int trial_index) {
    validate(cfg);
    Eigen::MatrixXcd q = draw_gaussian(cfg.n, cfg.seed, trial_index);
    SpectrumSample s;
    s.trial_index = trial_index;
    s.hs_norm_q = hs_norm(q);
    s.truncated = s.hs_norm_q > cfg.c1 * cfg.n;
    if (!s.truncated) {
        Eigen::MatrixXcd m = build_toeplitz(cfg.params, cfg.n);
        if (cfg.delta != 0) m += cfg.delta * q;
        s.eigenvalues = eigenvalues(m, cfg.balance);
    }
    return s;
}

double EmpiricalIntensity::total_stderr() const {
    return trials_used > 0 ? std::sqrt(total_var / trials_used) : 0.0;
}

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
    validate(cfg);
    const auto mask = annulus_mask(cfg.params, cfg.grid, cfg.region.r_inner,
                                   cfg.region.r_outer);
    const Eigen::MatrixXcd p = build_toeplitz(cfg.params, cfg.n);

    std::vector<TrialPayload> slots(cfg.trials);
    detail::parallel_for(cfg.trials, cfg.workers, [&](int t) {
        TrialPayload& out = slots[t];
        Eigen::MatrixXcd q = draw_gaussian(cfg.n, cfg.seed, t);
        out.summary.trial_index = t;
        out.summary.hs_norm_q = hs_norm(q);
        out.summary.truncated = out.summary.hs_norm_q > cfg.c1 * cfg.n;
        if (out.summary.truncated) return;
        try {
            Eigen::MatrixXcd m = p;
            if (cfg.delta != 0) m += cfg.delta * q;
            auto evs = eigenvalues(m, cfg.balance);
            out.summary.eig_count = int(evs.size());
            for (Complex lambda : evs) {
                int cell = cfg.grid.locate(lambda);
                if (cell >= 0 && mask[cell]) {
                    out.cells.push_back(std::int32_t(cell));
                }
            }
            out.summary.count_in_region = int(out.cells.size());
        } catch (const Error&) {
            out.summary.aborted = true;
            out.cells.clear();
        }
    });

    // Fixed-order reduction: integer count sums, so the aggregate is bitwise
    // identical for any worker count.
    const int cells = cfg.grid.cells();
    std::vector<long long> sum(cells, 0), sumsq(cells, 0);
    long long tot_sum = 0, tot_sumsq = 0;
    EnsembleResult res;
    res.trials.reserve(cfg.trials);
    int used = 0;
    for (int t = 0; t < cfg.trials; ++t) {
        TrialPayload& pl = slots[t];
        res.trials.push_back(pl.summary);
        if (pl.summary.aborted) {
            ++res.aborted_trials;
            continue;
        }
        if (pl.summary.truncated) ++res.truncated_trials;
        ++used;
        std::sort(pl.cells.begin(), pl.cells.end());
        for (size_t i = 0; i < pl.cells.size();) {
            size_t j = i;
            while (j < pl.cells.size() && pl.cells[j] == pl.cells[i]) ++j;
            long long c = (long long)(j - i);
            sum[pl.cells[i]] += c;
            sumsq[pl.cells[i]] += c * c;
            i = j;
        }
        long long total = (long long)pl.cells.size();
        tot_sum += total;
        tot_sumsq += total * total;
    }

    EmpiricalIntensity& emp = res.intensity;
    emp.grid = cfg.grid;
    emp.mask = mask;
    emp.mean_counts.assign(cells, 0.0);
    emp.var_counts.assign(cells, 0.0);
    emp.trials_used = used;
    if (used > 0) {
        for (int i = 0; i < cells; ++i) {
            emp.mean_counts[i] = double(sum[i]) / used;
            if (used > 1) {
                double centered = double(sumsq[i]) - double(sum[i]) * sum[i] / used;
                emp.var_counts[i] = std::max(0.0, centered / (used - 1));
            }
        }
        double total_mean = 0;
        for (int i = 0; i < cells; ++i) {
            if (mask[i]) total_mean += emp.mean_counts[i];
        }
        emp.total_mean = total_mean;
        if (used > 1) {
            double centered =
                double(tot_sumsq) - double(tot_sum) * tot_sum / used;
            emp.total_var = std::max(0.0, centered / (used - 1));
        }
    }

    if (cfg.delta > 0) {
        double r0 = cfg.region.r_outer + 1.0 / cfg.n;
        res.regime = regime_report(cfg.params, cfg.n, cfg.delta, r0);
    }
    return res;
}

LinearStatistic linear_statistic(const EnsembleConfig& cfg, const PhiSpec& phi) {
    validate(cfg);
    const auto mask = annulus_mask(cfg.params, cfg.grid, cfg.region.r_inner,
                                   cfg.region.r_outer);
    const Eigen::MatrixXcd p = build_toeplitz(cfg.params, cfg.n);

    auto eval_phi = [&](Complex lambda) -> double {
        switch (phi.kind) {
            case PhiSpec::Kind::AnnulusIndicator: {
                int cell = cfg.grid.locate(lambda);
                return (cell >= 0 && mask[cell]) ? 1.0 : 0.0;
            }
            case PhiSpec::Kind::SmoothedAnnulus: {
                double am =
                    std::abs(solve_characteristic(cfg.params, lambda).zeta_minus);
                if (phi.width <= 0) {
                    return (am > cfg.region.r_inner && am < cfg.region.r_outer)
                               ? 1.0
                               : 0.0;
                }
                double up = smoothstep((am - cfg.region.r_inner) / phi.width);
                double down = smoothstep((cfg.region.r_outer - am) / phi.width);
                return up * down;
            }
            case PhiSpec::Kind::RadialBump: {
                double d = std::abs(lambda - phi.center);
                if (d >= phi.width) return 0.0;
                double u = 1.0 - (d / phi.width) * (d / phi.width);
                return phi.amplitude * u * u;
            }
        }
        return 0.0;
    };

    std::vector<double> sums(cfg.trials, 0.0);
    std::vector<std::uint8_t> aborted(cfg.trials, 0);
    detail::parallel_for(cfg.trials, cfg.workers, [&](int t) {
        Eigen::MatrixXcd q = draw_gaussian(cfg.n, cfg.seed, t);
        if (hs_norm(q) > cfg.c1 * cfg.n) return;  // truncated: zero contribution
        try {
            Eigen::MatrixXcd m = p;
            if (cfg.delta != 0) m += cfg.delta * q;
            double s = 0;
            for (Complex lambda : eigenvalues(m, cfg.balance)) s += eval_phi(lambda);
            sums[t] = s;
        } catch (const Error&) {
            aborted[t] = 1;
        }
    });

    int used = 0;
    double mean = 0;
    for (int t = 0; t < cfg.trials; ++t) {
        if (aborted[t]) continue;
        ++used;
        mean += sums[t];
    }
    if (used == 0) return {0.0, 0.0};
    mean /= used;
    double var = 0;
    for (int t = 0; t < cfg.trials; ++t) {
        if (aborted[t]) continue;
        var += (sums[t] - mean) * (sums[t] - mean);
    }
    var = used > 1 ? var / (used - 1) : 0.0;
    return {mean, std::sqrt(var / used)};
}

}  // namespace toeplab
