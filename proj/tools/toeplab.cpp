// toeplab: spectra, eigenvalue densities, and identity checks for randomly
// perturbed bidiagonal Toeplitz matrices.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "toeplab/density.hpp"
#include "toeplab/ensemble.hpp"
#include "toeplab/io.hpp"
#include "toeplab/regime.hpp"
#include "toeplab/symbol.hpp"
#include "toeplab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toeplab;

namespace {

enum ExitCode {
    kOk = 0,
    kVerifyFailure = 1,
    kUsage = 2,
    kNumericalFailure = 3,
    kRegimeViolation = 4,
};

struct CommonFlags {
    double a_re = 1.0, a_im = 0.0;
    double b_re = 0.25, b_im = 0.0;
    std::string out_dir = ".";
    int workers = 1;
    std::uint64_t seed = 1;

    SymbolParams params() const { return normalize({a_re, a_im}, {b_re, b_im}); }
    // out_dir and workers are execution details: they must not enter the
    // manifest, whose identity pins the result bytes.
    json flags_json() const {
        json j;
        j["a_re"] = a_re;
        j["a_im"] = a_im;
        j["b_re"] = b_re;
        j["b_im"] = b_im;
        return j;
    }
};

void add_common(CLI::App* cmd, CommonFlags& c) {
    cmd->add_option("--a-re", c.a_re, "Re a (superdiagonal coefficient)");
    cmd->add_option("--a-im", c.a_im, "Im a");
    cmd->add_option("--b-re", c.b_re, "Re b (subdiagonal coefficient)");
    cmd->add_option("--b-im", c.b_im, "Im b");
    cmd->add_option("--out-dir", c.out_dir, "output directory");
    cmd->add_option("--workers", c.workers, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "RNG seed");
}

std::string out_path(const CommonFlags& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

json grid_json(const GridSpec& g) {
    json j;
    j["re_min"] = g.re_min;
    j["re_max"] = g.re_max;
    j["im_min"] = g.im_min;
    j["im_max"] = g.im_max;
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    return j;
}

json regime_json(const RegimeReport& r) {
    json j;
    j["n"] = r.n;
    j["delta"] = r.delta;
    j["r0"] = r.r0;
    j["r1"] = r.r1;
    j["term_growth"] = r.term_growth;
    j["term_coupling"] = r.term_coupling;
    j["delta_floor_ok"] = r.delta_floor_ok;
    j["r0_ok"] = r.r0_ok;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    return j;
}

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

// ---------------------------------------------------------------- spectrum

struct SpectrumFlags {
    CommonFlags common;
    int n = 0;
    double delta = 0.0;
    bool no_balance = false;
};

int run_spectrum(const SpectrumFlags& f) {
    Timer timer;
    auto p = f.common.params();
    auto analytic = unperturbed_spectrum(p, f.n);

    std::vector<Complex> numeric;
    if (f.n >= 2) {
        Eigen::MatrixXcd m = build_toeplitz(p, f.n);
        if (f.delta != 0) m += f.delta * draw_gaussian(f.n, f.common.seed, 0);
        numeric = eigenvalues(m, !f.no_balance);
        std::sort(numeric.begin(), numeric.end(), [](Complex a, Complex b) {
            return a.real() != b.real() ? a.real() < b.real()
                                        : a.imag() < b.imag();
        });
    }
    write_spectrum_csv(out_path(f.common, "spectrum.csv"), analytic, numeric);

    RunManifest man;
    man.command = "spectrum";
    man.params = f.common.flags_json();
    man.params["n"] = f.n;
    man.params["delta"] = f.delta;
    man.params["no_balance"] = f.no_balance;
    man.seed = f.common.seed;
    man.duration_seconds = timer.seconds();
    write_json_file(out_path(f.common, "spectrum_manifest.json"), man.to_json());
    return kOk;
}

// ----------------------------------------------------------------- density

struct DensityFlags {
    CommonFlags common;
    int n = 0;
    double delta = 0.0;
    double r0 = 0.0;
    double r1_margin = 1.0 / kRegimeC;
    double threshold = kRegimeThreshold;
    double re_min = 0, re_max = 0, im_min = 0, im_max = 0;
    bool have_bounds = false;
    int nx = 200, ny = 200;
    bool force = false;

    GridSpec grid(const SymbolParams& p) const {
        GridSpec g;
        if (have_bounds) {
            g.re_min = re_min;
            g.re_max = re_max;
            g.im_min = im_min;
            g.im_max = im_max;
        } else {
            double hw = 1.08 * p.geometry_scale();
            g.re_min = -hw;
            g.re_max = hw;
            g.im_min = -hw;
            g.im_max = hw;
        }
        g.nx = nx;
        g.ny = ny;
        return g;
    }
};

void add_density_flags(CLI::App* cmd, DensityFlags& f, bool require_delta) {
    add_common(cmd, f.common);
    cmd->add_option("--n", f.n, "matrix dimension")
        ->required()
        ->check(CLI::Range(2, 100000));
    auto* d = cmd->add_option("--delta", f.delta, "coupling constant");
    if (require_delta) {
        d->required()->check(CLI::PositiveNumber);
    } else {
        d->check(CLI::NonNegativeNumber);
    }
    cmd->add_option("--r0", f.r0, "outer family parameter")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--r1-margin", f.r1_margin,
                    "inner radius margin above sqrt(|b/a|)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threshold", f.threshold, "regime smallness threshold")
        ->check(CLI::PositiveNumber);
    auto* remin = cmd->add_option("--re-min", f.re_min, "grid bound");
    auto* remax = cmd->add_option("--re-max", f.re_max, "grid bound");
    auto* immin = cmd->add_option("--im-min", f.im_min, "grid bound");
    auto* immax = cmd->add_option("--im-max", f.im_max, "grid bound");
    remin->needs(remax, immin, immax);
    cmd->add_option("--nx", f.nx, "grid cells, real axis")
        ->check(CLI::Range(1, 4096));
    cmd->add_option("--ny", f.ny, "grid cells, imaginary axis")
        ->check(CLI::Range(1, 4096));
    cmd->callback([&f, remin] { f.have_bounds = remin->count() > 0; });
}

int run_density(const DensityFlags& f) {
    Timer timer;
    auto p = f.common.params();
    double r1 = p.r_min() + f.r1_margin;
    auto grid = f.grid(p);

    auto regime = regime_report(p, f.n, f.delta, f.r0, f.threshold);

    RunManifest man;
    man.command = "density";
    man.params = f.common.flags_json();
    man.params["n"] = f.n;
    man.params["delta"] = f.delta;
    man.params["r0"] = f.r0;
    man.params["r1_margin"] = f.r1_margin;
    man.params["threshold"] = f.threshold;
    man.params["grid"] = grid_json(grid);
    man.params["force"] = f.force;
    man.seed = f.common.seed;

    json rj;
    rj["manifest"] = man.to_json();
    rj["regime"] = regime_json(regime);
    write_json_file(out_path(f.common, "regime.json"), rj);

    if (!regime.pass && !f.force) {
        std::cerr << "density: regime check failed (term_growth="
                  << format_double(regime.term_growth)
                  << ", term_coupling=" << format_double(regime.term_coupling)
                  << "); rerun with --force to override\n";
        return kRegimeViolation;
    }

    auto field = density_field(p, f.n, f.delta, grid, f.r0, r1,
                               f.common.workers, /*check_regime=*/false);
    if (field.masked_count() == 0) {
        std::cerr << "density: warning: the grid does not intersect the "
                     "admissible annulus\n";
    }

    write_density_csv(out_path(f.common, "density.csv"), field);
    write_density_pgm(out_path(f.common, "density.pgm"), field);

    man.duration_seconds = timer.seconds();
    json dj;
    dj["manifest"] = man.to_json();
    dj["masked_cells"] = field.masked_count();
    dj["masked_integral"] = field.masked_integral();
    dj["r_inner"] = field.r_inner;
    dj["r_outer"] = field.r_outer;
    dj["regime_pass"] = regime.pass;
    write_json_file(out_path(f.common, "density.json"), dj);
    return kOk;
}

// ---------------------------------------------------------------- ensemble

struct EnsembleFlags {
    DensityFlags density;
    int trials = 0;
    bool no_balance = false;
};

int run_ensemble_cmd(const EnsembleFlags& f) {
    Timer timer;
    const DensityFlags& d = f.density;
    auto p = d.common.params();
    double r1 = p.r_min() + d.r1_margin;
    auto grid = d.grid(p);

    EnsembleConfig cfg;
    cfg.params = p;
    cfg.n = d.n;
    cfg.delta = d.delta;
    cfg.trials = f.trials;
    cfg.seed = d.common.seed;
    cfg.region = {r1, d.r0 - 1.0 / d.n};
    cfg.grid = grid;
    cfg.workers = d.common.workers;
    cfg.balance = !f.no_balance;

    auto field = density_field(p, d.n, d.delta, grid, d.r0, r1,
                               d.common.workers, /*check_regime=*/false);
    auto res = run_ensemble(cfg);
    if (res.regime && !res.regime->pass) {
        std::cerr << "ensemble: warning: regime check failed (advisory)\n";
    }

    RunManifest man;
    man.command = "ensemble";
    man.params = d.common.flags_json();
    man.params["n"] = d.n;
    man.params["delta"] = d.delta;
    man.params["r0"] = d.r0;
    man.params["r1_margin"] = d.r1_margin;
    man.params["threshold"] = d.threshold;
    man.params["grid"] = grid_json(grid);
    man.params["trials"] = f.trials;
    man.params["no_balance"] = f.no_balance;
    man.seed = d.common.seed;
    man.duration_seconds = timer.seconds();

    const auto& emp = res.intensity;
    json cells = json::array();
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            int i = grid.index(ix, iy);
            if (!emp.mask[i]) continue;
            json cell;
            Complex c = grid.center(ix, iy);
            cell["re"] = c.real();
            cell["im"] = c.imag();
            double theory = field.values[i] * grid.cell_area();
            cell["theory"] = theory;
            cell["empirical_mean"] = emp.mean_counts[i];
            double se = emp.trials_used > 0
                            ? std::sqrt(emp.var_counts[i] / emp.trials_used)
                            : 0.0;
            cell["z_score"] =
                se > 0 ? (emp.mean_counts[i] - theory) / se : 0.0;
            cells.push_back(cell);
        }
    }

    json ej;
    ej["manifest"] = man.to_json();
    ej["theory_integral"] = field.masked_integral();
    ej["total_mean"] = emp.total_mean;
    ej["total_stderr"] = emp.total_stderr();
    ej["per_cell"] = cells;
    ej["trials"] = f.trials;
    ej["trials_used"] = emp.trials_used;
    ej["truncated_trials"] = res.truncated_trials;
    ej["aborted_trials"] = res.aborted_trials;
    ej["regime"] = res.regime ? regime_json(*res.regime) : json(nullptr);
    write_json_file(out_path(d.common, "ensemble.json"), ej);

    if (res.aborted_trials * 100 > f.trials) {
        std::cerr << "ensemble: more than 1% of trials aborted\n";
        return kNumericalFailure;
    }
    return kOk;
}

// ------------------------------------------------------------------ regime

struct RegimeFlags {
    CommonFlags common;
    int n = 0;
    double delta = 0.0;
    double r0 = 0.0;
    double threshold = kRegimeThreshold;
};

int run_regime(const RegimeFlags& f) {
    Timer timer;
    auto p = f.common.params();
    auto rep = regime_report(p, f.n, f.delta, f.r0, f.threshold);

    RunManifest man;
    man.command = "regime";
    man.params = f.common.flags_json();
    man.params["n"] = f.n;
    man.params["delta"] = f.delta;
    man.params["r0"] = f.r0;
    man.params["threshold"] = f.threshold;
    man.seed = f.common.seed;
    man.duration_seconds = timer.seconds();

    json rj;
    rj["manifest"] = man.to_json();
    rj["regime"] = regime_json(rep);
    write_json_file(out_path(f.common, "regime.json"), rj);

    std::cout << "term_growth " << format_double(rep.term_growth) << '\n'
              << "term_coupling " << format_double(rep.term_coupling) << '\n'
              << "r1 " << format_double(rep.r1) << '\n'
              << "verdict " << (rep.pass ? "pass" : "fail") << '\n';
    return rep.pass ? kOk : kRegimeViolation;
}

// ------------------------------------------------------------------ verify

struct VerifyFlags {
    CommonFlags common;
    std::vector<int> n_list{2, 8, 32, 128};
    int samples = 100;
    double tol = 1e-6;
};

int run_verify(const VerifyFlags& f) {
    Timer timer;
    VerifyOptions opts;
    opts.params = f.common.params();
    opts.n_list = f.n_list;
    opts.samples = f.samples;
    opts.tol = f.tol;
    opts.seed = f.common.seed;
    auto rep = run_verify_suite(opts);

    RunManifest man;
    man.command = "verify";
    man.params = f.common.flags_json();
    man.params["n_list"] = f.n_list;
    man.params["samples"] = f.samples;
    man.params["tol"] = f.tol;
    man.seed = f.common.seed;
    man.duration_seconds = timer.seconds();

    json checks;
    for (const auto& c : rep.checks) {
        json cj;
        cj["pass"] = c.pass;
        cj["worst"] = c.worst;
        cj["worst_z"] = {c.worst_z.real(), c.worst_z.imag()};
        cj["worst_n"] = c.worst_n;
        cj["detail"] = c.detail;
        checks[c.name] = cj;
        std::cout << (c.pass ? "pass " : "FAIL ") << c.name << "  worst "
                  << format_double(c.worst) << '\n';
    }
    json vj;
    vj["manifest"] = man.to_json();
    vj["checks"] = checks;
    vj["all_pass"] = rep.all_pass();
    write_json_file(out_path(f.common, "verify.json"), vj);
    return rep.all_pass() ? kOk : kVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "toeplab: eigenvalue densities of randomly perturbed bidiagonal "
        "Toeplitz matrices"};
    app.require_subcommand(1);

    SpectrumFlags sf;
    auto* spectrum = app.add_subcommand(
        "spectrum", "exact and computed spectra, optionally perturbed");
    add_common(spectrum, sf.common);
    spectrum->add_option("--n", sf.n, "matrix dimension")
        ->required()
        ->check(CLI::Range(1, 100000));
    spectrum->add_option("--delta", sf.delta, "coupling constant")
        ->check(CLI::NonNegativeNumber);
    spectrum->add_flag("--no-balance", sf.no_balance,
                       "disable diagonal balancing in the eigensolver");

    DensityFlags df;
    auto* density = app.add_subcommand(
        "density", "theoretical density field over the admissible annulus");
    add_density_flags(density, df, /*require_delta=*/true);
    density->add_flag("--force", df.force, "proceed despite a failing regime");

    EnsembleFlags ef;
    auto* ensemble = app.add_subcommand(
        "ensemble", "Monte Carlo eigenvalue intensity vs the theory field");
    add_density_flags(ensemble, ef.density, /*require_delta=*/false);
    ensemble->add_option("--trials", ef.trials, "Monte Carlo trials")
        ->required()
        ->check(CLI::PositiveNumber);
    ensemble->add_flag("--no-balance", ef.no_balance,
                       "disable diagonal balancing in the eigensolver");

    RegimeFlags rf;
    auto* regime =
        app.add_subcommand("regime", "parameter-range report for (n, delta, r0)");
    add_common(regime, rf.common);
    regime->add_option("--n", rf.n, "matrix dimension")->required();
    regime->add_option("--delta", rf.delta, "coupling constant")->required();
    regime->add_option("--r0", rf.r0, "outer family parameter")->required();
    regime->add_option("--threshold", rf.threshold, "smallness threshold");

    VerifyFlags vf;
    auto* verify =
        app.add_subcommand("verify", "run the numerical identity suite");
    add_common(verify, vf.common);
    verify->add_option("--n-list", vf.n_list, "truncation orders")
        ->delimiter(',');
    verify->add_option("--samples", vf.samples, "sample points per check")
        ->check(CLI::PositiveNumber);
    verify->add_option("--tol", vf.tol, "identity tolerance")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*spectrum) return run_spectrum(sf);
        if (*density) return run_density(df);
        if (*ensemble) return run_ensemble_cmd(ef);
        if (*regime) return run_regime(rf);
        if (*verify) return run_verify(vf);
    } catch (const RegimeViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRegimeViolation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
    return kUsage;
}
