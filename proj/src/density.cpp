#include "toeplab/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parallel.hpp"
#include "toeplab/regime.hpp"

namespace toeplab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegenerateTol = 1e-10;

Complex pow_int(Complex t, long e) {
    Complex r = 1.0;
    while (e > 0) {
        if (e & 1) r *= t;
        t *= t;
        e >>= 1;
    }
    return r;
}

BranchPair separated_branches(const SymbolParams& p, Complex z) {
    auto bp = solve_characteristic(p, z);
    double sep = std::abs(bp.zeta_minus - bp.zeta_plus);
    double size = std::abs(bp.zeta_minus) + std::abs(bp.zeta_plus);
    if (sep < kDegenerateTol * size) {
        throw DegenerateRoots("characteristic roots coincide (focal point)");
    }
    return bp;
}

// Partial sums F_1..F_m of the geometric series in t, built incrementally.
std::vector<Complex> partial_geom_table(Complex t, int m) {
    std::vector<Complex> f(m + 1);
    Complex sum = 0.0, power = 1.0;
    for (int k = 1; k <= m; ++k) {
        sum += power;
        power *= t;
        f[k] = sum;
    }
    return f;
}

double kahan_add(double& sum, double& comp, double term) {
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    return sum;
}

// sum_{mu=0}^{n-1} |zeta_-|^{2 mu} |F_{mu+1}(zeta_+/zeta_-)|^2
double factored_sum(const BranchPair& bp, int n) {
    Complex t = bp.zeta_plus / bp.zeta_minus;
    double am2 = std::norm(bp.zeta_minus);
    double sum = 0, comp = 0;
    double radial = 1.0;
    Complex f = 0.0, power = 1.0;
    for (int mu = 0; mu < n; ++mu) {
        f += power;
        power *= t;
        kahan_add(sum, comp, radial * std::norm(f));
        radial *= am2;
    }
    return sum;
}

}  // namespace

Complex partial_geom(Complex t, int m) {
    if (m < 1) return 0.0;
    if (std::abs(1.0 - t) < 1e-8) {
        Complex sum = 0.0, power = 1.0;
        for (int k = 0; k < m; ++k) {
            sum += power;
            power *= t;
        }
        return sum;
    }
    return (1.0 - pow_int(t, m)) / (1.0 - t);
}

Complex g0(const SymbolParams& p, int n, Complex z) {
    auto bp = separated_branches(p, z);
    Complex t = bp.zeta_plus / bp.zeta_minus;
    return pow_int(bp.zeta_minus, n) * partial_geom(t, n + 1) / p.a;
}

Eigen::MatrixXcd z_vector(const SymbolParams& p, int n, Complex z) {
    auto bp = separated_branches(p, z);
    Complex t = bp.zeta_plus / bp.zeta_minus;
    auto f = partial_geom_table(t, n);
    std::vector<Complex> zpow(n);
    zpow[0] = 1.0;
    for (int k = 1; k < n; ++k) zpow[k] = zpow[k - 1] * bp.zeta_minus;

    // rank one: Z = a^{-2} v w^T with v_j = F_{n+1-j} zeta_-^{n-j},
    // w_k = F_k zeta_-^{k-1}
    Eigen::VectorXcd v(n), w(n);
    for (int j = 1; j <= n; ++j) v(j - 1) = f[n + 1 - j] * zpow[n - j];
    for (int k = 1; k <= n; ++k) w(k - 1) = f[k] * zpow[k - 1];
    Complex inv_a2 = 1.0 / (p.a * p.a);
    return inv_a2 * (v * w.transpose());
}

double z_norm(const SymbolParams& p, int n, Complex z) {
    auto bp = separated_branches(p, z);
    return factored_sum(bp, n) / std::norm(p.a);
}

double k_n(const SymbolParams& p, int n, Complex z) { return z_norm(p, n, z); }

double k_inf(const SymbolParams& p, Complex z) {
    auto bp = separated_branches(p, z);
    const double am = std::abs(bp.zeta_minus);
    if (am >= 1.0) {
        throw OutsideDomain("k_inf: |zeta_-| >= 1, z not inside E_1");
    }
    const double inv_a2 = 1.0 / std::norm(p.a);
    const double sep = std::abs(bp.zeta_minus - bp.zeta_plus);
    const double size = am + std::abs(bp.zeta_plus);

    if (sep >= 0.05 * size) {
        const double x = std::norm(bp.zeta_minus);
        const double y = std::norm(bp.zeta_plus);
        const Complex w = bp.zeta_minus * std::conj(bp.zeta_plus);
        double num = x / (1 - x) + y / (1 - y) - 2 * (w / (1.0 - w)).real();
        return num * inv_a2 / std::norm(bp.zeta_minus - bp.zeta_plus);
    }

    // Near the foci the closed form cancels; the series has positive terms.
    const Complex s1 = bp.zeta_plus + bp.zeta_minus;
    const Complex s2 = bp.zeta_plus * bp.zeta_minus;
    Complex u_prev = 0.0, u = 1.0;
    double sum = std::norm(u), comp = 0;
    int small_streak = 0;
    for (long k = 1; k < 5000000; ++k) {
        Complex u_next = s1 * u - s2 * u_prev;
        u_prev = u;
        u = u_next;
        double term = std::norm(u);
        kahan_add(sum, comp, term);
        if (term < sum * 1e-18) {
            if (++small_streak >= 4) break;
        } else {
            small_streak = 0;
        }
    }
    return sum * inv_a2;
}

double fd_scale(const SymbolParams& p, Complex z) {
    double am = std::abs(solve_characteristic(p, z).zeta_minus);
    if (am >= 1.0) return 0.0;
    return 0.25 * (1.0 - am * am) * p.geometry_scale();
}

double fd_step(const SymbolParams& p, Complex z) {
    double am = std::abs(solve_characteristic(p, z).zeta_minus);
    if (am >= 1.0) return 0.0;
    return 5e-4 * (1.0 - am * am) * p.geometry_scale();
}

double xi_density(const SymbolParams& p, Complex z, double h) {
    if (!(h > 0)) throw std::invalid_argument("xi_density: h must be positive");
    double am = std::abs(solve_characteristic(p, z).zeta_minus);
    if (am >= 1.0) {
        throw OutsideDomain("xi_density: z not strictly inside E_1");
    }
    if (h > 0.1 * fd_scale(p, z)) {
        throw StepTooLarge("xi_density: step too coarse for this point");
    }
    const double kc = k_inf(p, z);
    auto g = [&](double dx, double dy) {
        return std::log1p((k_inf(p, z + Complex(dx, dy)) - kc) / kc);
    };
    // compact 9-point Laplacian; the center coefficient multiplies g == 0
    double lap = (4 * (g(h, 0) + g(-h, 0) + g(0, h) + g(0, -h)) +
                  g(h, h) + g(h, -h) + g(-h, h) + g(-h, -h)) /
                 (6 * h * h);
    return lap / (2 * kPi);
}

double error_envelope(const SymbolParams& p, int n, double delta, Complex z) {
    double am = std::abs(solve_characteristic(p, z).zeta_minus);
    double one_minus = 1.0 - am;
    double growth = n * std::pow(am, n - 1) * one_minus * one_minus / delta;
    double coupling = delta * double(n) * double(n) * double(n);
    return growth + coupling;
}

namespace {

// 4th-order centered stencils for the Gram identity checks.

double gram_lhs(const SymbolParams& p, int n, Complex z, double h) {
    auto Z = [&](Complex w) { return z_vector(p, n, w); };
    Eigen::MatrixXcd zc = Z(z);
    Eigen::MatrixXcd dx = (-Z(z + 2 * h) + 8.0 * Z(z + h) - 8.0 * Z(z - h) +
                           Z(z - 2 * h)) /
                          (12 * h);
    Complex ih(0, h);
    Eigen::MatrixXcd dy = (-Z(z + 2.0 * ih) + 8.0 * Z(z + ih) -
                           8.0 * Z(z - ih) + Z(z - 2.0 * ih)) /
                          (12 * h);
    Eigen::MatrixXcd dz = 0.5 * (dx - Complex(0, 1) * dy);
    Complex inner = zc.cwiseProduct(dz.conjugate()).sum();
    return dz.squaredNorm() - std::norm(inner) / zc.squaredNorm();
}

double log_kn_laplacian(const SymbolParams& p, int n, Complex z, double h) {
    const double kc = k_n(p, n, z);
    auto g = [&](double dx, double dy) {
        return std::log1p((k_n(p, n, z + Complex(dx, dy)) - kc) / kc);
    };
    auto axis = [&](bool imag) {
        auto at = [&](double s) { return imag ? g(0, s) : g(s, 0); };
        return (-at(2 * h) + 16 * at(h) + 16 * at(-h) - at(-2 * h)) /
               (12 * h * h);
    };
    return axis(false) + axis(true);
}

void check_fd_step(const SymbolParams& p, Complex z, double h) {
    if (!(h > 0)) throw std::invalid_argument("finite-difference step must be positive");
    if (h > 0.05 * fd_scale(p, z)) {
        throw StepTooLarge("finite-difference step too coarse for this point");
    }
}

}  // namespace

IdentityReport verify_prop42(const SymbolParams& p, int n, Complex z, double h) {
    if (n < 1) throw std::invalid_argument("verify_prop42: n must be >= 1");
    if (n == 1) return {z, 0.0, 0.0, 0.0, 1};  // K_1 is constant in z
    separated_branches(p, z);
    check_fd_step(p, z, h);

    double lhs = gram_lhs(p, n, z, h);
    double kn = k_n(p, n, z);
    double rhs = 0.5 * kn * kn * log_kn_laplacian(p, n, z, h);
    double scale = std::max(std::abs(lhs), std::abs(rhs));
    double rel = scale == 0 ? 0.0 : std::abs(lhs - rhs) / scale;
    return {z, lhs, rhs, rel, n};
}

LowerBoundResult verify_lower_bound(const SymbolParams& p, int n, Complex z,
                                    double h) {
    if (n < 2) throw std::invalid_argument("verify_lower_bound: n must be >= 2");
    auto rep = verify_prop42(p, n, z, h);
    double bound = 2.0 / std::pow(std::abs(p.a), 6);
    return {rep.lhs, bound, rep.lhs >= bound * (1 - 1e-6)};
}

RatioStats verify_prop43_order(const SymbolParams& p, int n,
                               const std::vector<Complex>& z_samples) {
    RatioStats st;
    st.min_ratio = std::numeric_limits<double>::infinity();
    st.max_ratio = 0;
    for (Complex z : z_samples) {
        double h = fd_step(p, z);
        check_fd_step(p, z, h);
        double lhs = gram_lhs(p, n, z, h);
        double am2 = std::norm(solve_characteristic(p, z).zeta_minus);
        double fn = (1.0 - std::pow(am2, n)) / (1.0 - am2);
        double ratio = lhs / (fn * fn * fn * fn);
        st.min_ratio = std::min(st.min_ratio, ratio);
        st.max_ratio = std::max(st.max_ratio, ratio);
        ++st.count;
    }
    return st;
}

Complex g_lin(const SymbolParams& p, int n, double delta, Complex z,
              const Eigen::MatrixXcd& q) {
    Complex base = g0(p, n, z);
    if (delta == 0.0) return base;
    Complex coupling = q.cwiseProduct(z_vector(p, n, z)).sum();
    return base - delta * coupling;
}

// ---------------------------------------------------------------------------
// Roots of g0 by winding-number subdivision

namespace {

struct BoundaryHit {};  // contour ran into a root or focal point; jitteric

struct Box {
    double x0, x1, y0, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Complex center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
};

template <class F>
double edge_arg_delta(const F& f, Complex z1, Complex z2, Complex w1,
                      Complex w2, int depth) {
    double d = std::arg(w2 / w1);
    if (std::abs(d) <= 1.0 || depth >= 48) return d;
    Complex zm = 0.5 * (z1 + z2);
    Complex wm = f(zm);
    if (std::abs(wm) < 1e-280) throw BoundaryHit{};
    return edge_arg_delta(f, z1, zm, w1, wm, depth + 1) +
           edge_arg_delta(f, zm, z2, wm, w2, depth + 1);
}

template <class F>
int winding_number(const F& f, const Box& b, int base_segments) {
    const Complex c[4] = {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
    double total = 0;
    for (int i = 0; i < 4; ++i) {
        // base subdivision first: a single corner-to-corner step could hide
        // a full 2 pi wrap from the adaptive refinement
        const Complex z0 = c[i], z1 = c[(i + 1) % 4];
        Complex zprev = z0, wprev = f(z0);
        if (std::abs(wprev) < 1e-280) throw BoundaryHit{};
        for (int s = 1; s <= base_segments; ++s) {
            Complex z = z0 + (z1 - z0) * (double(s) / base_segments);
            Complex w = f(z);
            if (std::abs(w) < 1e-280) throw BoundaryHit{};
            total += edge_arg_delta(f, zprev, z, wprev, w, 0);
            zprev = z;
            wprev = w;
        }
    }
    return int(std::llround(total / (2 * kPi)));
}

template <class F>
int winding_with_retry(const F& f, Box b, int base_segments) {
    double pad = std::max(b.width(), b.height());
    for (int attempt = 0; attempt < 12; ++attempt) {
        try {
            return winding_number(f, b, base_segments);
        } catch (const BoundaryHit&) {
            double j = pad * 3.1e-4 * (attempt + 1);
            b = {b.x0 - j, b.x1 + 1.37 * j, b.y0 - 0.83 * j, b.y1 + 1.11 * j};
        } catch (const DegenerateRoots&) {
            double j = pad * 3.1e-4 * (attempt + 1);
            b = {b.x0 - j, b.x1 + 1.37 * j, b.y0 - 0.83 * j, b.y1 + 1.11 * j};
        }
    }
    throw Error("winding number: contour kept hitting zeros");
}

template <class F>
Complex newton_polish(const F& f, Complex z) {
    for (int it = 0; it < 60; ++it) {
        double e = 1e-7 * (1 + std::abs(z));
        Complex d = (f(z + e) - f(z - e)) / (2 * e);
        if (d == Complex(0)) break;
        Complex step = f(z) / d;
        z -= step;
        if (std::abs(step) <= 1e-14 * (1 + std::abs(z))) break;
    }
    return z;
}

template <class F>
void collect_roots(const F& f, const Box& box, int count, int base_segments,
                   double scale, std::vector<Complex>& out, int depth) {
    if (count <= 0) return;
    double size = std::max(box.width(), box.height());
    if (count == 1 && size < 2e-3 * scale) {
        Complex root = newton_polish(f, box.center());
        // accept only tight hits; a Newton escape to a neighboring root is
        // caught here and resolved by further subdivision
        double slack = 0.25 * size;
        if (root.real() >= box.x0 - slack && root.real() <= box.x1 + slack &&
            root.imag() >= box.y0 - slack && root.imag() <= box.y1 + slack) {
            out.push_back(root);
            return;
        }
    }
    if (size < 1e-9 * scale || depth > 120) {
        for (int i = 0; i < count; ++i) out.push_back(box.center());
        return;
    }
    double ratio = 0.51372949;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Box lo = box, hi = box;
        if (box.width() >= box.height()) {
            double cut = box.x0 + ratio * box.width();
            lo.x1 = cut;
            hi.x0 = cut;
        } else {
            double cut = box.y0 + ratio * box.height();
            lo.y1 = cut;
            hi.y0 = cut;
        }
        int nlo = winding_with_retry(f, lo, base_segments);
        int nhi = winding_with_retry(f, hi, base_segments);
        if (nlo + nhi == count) {
            collect_roots(f, lo, nlo, base_segments, scale, out, depth + 1);
            collect_roots(f, hi, nhi, base_segments, scale, out, depth + 1);
            return;
        }
        ratio = 0.5 * ratio + 0.25;  // nudge the cut off the troublesome spot
    }
    throw Error("collect_roots: winding counts failed to split consistently");
}

}  // namespace

std::vector<Complex> g0_roots(const SymbolParams& p, int n) {
    auto f = [&](Complex z) { return g0(p, n, z); };
    double hw = 1.1 * std::abs(focal_points(p).first);
    Box box{-hw * 1.0321, hw * 1.0567, -hw * 0.9833, hw * 1.0119};
    const int base_segments = std::max(32, 6 * n);
    int total = winding_with_retry(f, box, base_segments);
    if (total != n) {
        throw Error("g0_roots: winding count does not match the degree");
    }
    std::vector<Complex> roots;
    roots.reserve(n);
    collect_roots(f, box, total, base_segments, roots, 0);
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

// ---------------------------------------------------------------------------
// Grid evaluation

int GridSpec::locate(Complex z) const {
    double x = z.real(), y = z.imag();
    if (x < re_min || x > re_max || y < im_min || y > im_max) return -1;
    int ix = x == re_max ? nx - 1 : int((x - re_min) / dx());
    int iy = y == im_max ? ny - 1 : int((y - im_min) / dy());
    ix = std::clamp(ix, 0, nx - 1);
    iy = std::clamp(iy, 0, ny - 1);
    return index(ix, iy);
}

std::vector<std::uint8_t> annulus_mask(const SymbolParams& p,
                                       const GridSpec& grid, double r_inner,
                                       double r_outer) {
    std::vector<std::uint8_t> mask(grid.cells(), 0);
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            double am =
                std::abs(solve_characteristic(p, grid.center(ix, iy)).zeta_minus);
            mask[grid.index(ix, iy)] = (am > r_inner && am < r_outer) ? 1 : 0;
        }
    }
    return mask;
}

int DensityField::masked_count() const {
    int c = 0;
    for (auto m : mask) c += m != 0;
    return c;
}

double DensityField::masked_integral() const {
    double sum = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) sum += values[i];
    }
    return sum * grid.cell_area();
}

DensityField density_field(const SymbolParams& p, int n, double delta,
                           const GridSpec& grid, double r0, double r1,
                           int workers, bool check_regime, double threshold) {
    if (check_regime) {
        auto rep = regime_report(p, n, delta, r0, threshold);
        if (!rep.pass) {
            throw RegimeViolation("density_field: parameter range check failed");
        }
    }
    DensityField field;
    field.grid = grid;
    field.r_inner = r1;
    field.r_outer = r0 - 1.0 / n;
    field.mask = annulus_mask(p, grid, field.r_inner, field.r_outer);
    field.values.assign(grid.cells(), std::numeric_limits<double>::quiet_NaN());

    detail::parallel_for(grid.ny, workers, [&](int iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            int i = grid.index(ix, iy);
            if (!field.mask[i]) continue;
            Complex c = grid.center(ix, iy);
            field.values[i] = xi_density(p, c, fd_step(p, c));
        }
    });
    return field;
}

std::vector<Complex> sample_annulus(const SymbolParams& p, int count,
                                    double rho_lo, double rho_hi,
                                    std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    auto unit = [&] { return double(eng() >> 11) * 0x1.0p-53; };
    std::vector<Complex> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        double rho = rho_lo + (rho_hi - rho_lo) * unit();
        double theta = 2 * kPi * unit();
        out.push_back(f_eval(p, std::polar(rho, theta)));
    }
    return out;
}

}  // namespace toeplab
