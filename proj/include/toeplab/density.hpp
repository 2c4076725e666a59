#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "toeplab/symbol.hpp"

namespace toeplab {

// Partial geometric sum F_m(t) = 1 + t + ... + t^{m-1} (m >= 1 terms).
// Uses the closed form (1 - t^m)/(1 - t) away from t = 1 and direct
// summation when |1 - t| < 1e-8.
Complex partial_geom(Complex t, int m);

// g_0(z) = (zeta_-^{n+1} - zeta_+^{n+1}) / (a (zeta_- - zeta_+)), the
// holomorphic function whose zeros are the unperturbed eigenvalues.
// Throws DegenerateRoots when zeta_- == zeta_+ (the foci).
Complex g0(const SymbolParams& p, int n, Complex z);

// The rank-one n x n matrix Z with entries
//   Z_{jk} = a^{-2} F_{n+1-j}(zeta_+/zeta_-) F_k(zeta_+/zeta_-)
//            zeta_-^{n-j+k-1},   1 <= j,k <= n.
Eigen::MatrixXcd z_vector(const SymbolParams& p, int n, Complex z);

// Hilbert-Schmidt norm of Z via the factored sum
//   |Z| = |a|^{-2} sum_{mu=0}^{n-1} |zeta_-|^{2 mu} |F_{mu+1}|^2.
double z_norm(const SymbolParams& p, int n, Complex z);

// K_n(z) = sum_{mu=0}^{n-1} |(zeta_-^{mu+1} - zeta_+^{mu+1})
//                            / (a (zeta_- - zeta_+))|^2.
// Identical sum to z_norm (the summands coincide term by term).
double k_n(const SymbolParams& p, int n, Complex z);

// K(z) = lim K_n, evaluated in closed form from the geometric series:
//   K = [ x/(1-x) + y/(1-y) - 2 Re(w/(1-w)) ] / (|a|^2 |zeta_- - zeta_+|^2),
//   x = |zeta_-|^2, y = |zeta_+|^2, w = zeta_- conj(zeta_+).
// Near the foci (cancellation regime) the all-positive-terms series is
// summed instead. Requires |zeta_-| < 1 (OutsideDomain otherwise).
double k_inf(const SymbolParams& p, Complex z);

// Length scale for finite-difference steps around z: a fraction of the
// distance to the blow-up set |zeta_-| = 1, in z units. K extends
// real-analytically across the focal segment, so no shrinking is needed
// there.
double fd_scale(const SymbolParams& p, Complex z);

// Default step used by density_field and the verification suite.
double fd_step(const SymbolParams& p, Complex z);

// Density xi(z) = (2/pi) d_z d_zbar ln K(z), with the mixed derivative
// taken as 1/4 of the compact 9-point finite-difference Laplacian of
// ln K at step h. Throws OutsideDomain for |zeta_-| >= 1 and StepTooLarge
// when h exceeds 1e-1 * fd_scale(z).
double xi_density(const SymbolParams& p, Complex z, double h);

// The two-term error scale of the density formula (no O(1) constant):
//   n |zeta_-|^{n-1} (1 - |zeta_-|)^2 / delta + delta n^3.
double error_envelope(const SymbolParams& p, int n, double delta, Complex z);

struct IdentityReport {
    Complex z;
    double lhs = 0;
    double rhs = 0;
    double rel_err = 0;
    int n = 0;
};

// Checks |d_z Z|^2 - |(Z|d_z Z)|^2 / |Z|^2 = 2 K_n^2 d_z d_zbar ln K_n,
// the left side from entrywise finite differences of Z, the right side
// from a finite-difference Laplacian of ln K_n. Both centered stencils are
// fourth order in h.
IdentityReport verify_prop42(const SymbolParams& p, int n, Complex z, double h);

struct LowerBoundResult {
    double lhs = 0;
    double bound = 0;
    bool pass = false;
};

// Checks the linear-independence lower bound LHS >= 2 / |a|^6.
LowerBoundResult verify_lower_bound(const SymbolParams& p, int n, Complex z,
                                    double h);

struct RatioStats {
    double min_ratio = 0;
    double max_ratio = 0;
    int count = 0;
};

// Ratio LHS / F_n(|zeta_-|^2)^4 over the given sample points; both sides are
// of the same order of magnitude on the admissible annulus.
RatioStats verify_prop43_order(const SymbolParams& p, int n,
                               const std::vector<Complex>& z_samples);

// First-order model g_0(z) - delta * sum_{jk} q_{jk} Z_{jk}(z) of the
// perturbed determinant; holomorphic in z.
Complex g_lin(const SymbolParams& p, int n, double delta, Complex z,
              const Eigen::MatrixXcd& q);

// All n roots of g_0 located by winding-number subdivision of a rectangle
// enclosing the focal segment, polished by Newton iteration. Sorted by
// (Re, Im). Intended for moderate n (the verification suite uses n <= 12).
std::vector<Complex> g0_roots(const SymbolParams& p, int n);

// Rectangular evaluation grid with half-open cells [lo, hi); points exactly
// on the global upper boundary belong to the last cell.
struct GridSpec {
    double re_min = -1.5, re_max = 1.5;
    double im_min = -1.5, im_max = 1.5;
    int nx = 200, ny = 200;

    double dx() const { return (re_max - re_min) / nx; }
    double dy() const { return (im_max - im_min) / ny; }
    double cell_area() const { return dx() * dy(); }
    int cells() const { return nx * ny; }
    int index(int ix, int iy) const { return iy * nx + ix; }
    Complex center(int ix, int iy) const {
        return {re_min + (ix + 0.5) * dx(), im_min + (iy + 0.5) * dy()};
    }
    // Cell containing z, or -1 when z is outside the grid.
    int locate(Complex z) const;
};

// Cell-center membership in the annulus r_inner < |zeta_-| < r_outer.
std::vector<std::uint8_t> annulus_mask(const SymbolParams& p,
                                       const GridSpec& grid, double r_inner,
                                       double r_outer);

// Theoretical density sampled on a grid. Unmasked cells hold NaN and are
// excluded from aggregates.
struct DensityField {
    GridSpec grid;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    double r_inner = 0;  // annulus radii actually used for the mask
    double r_outer = 0;

    int masked_count() const;
    double masked_integral() const;  // midpoint quadrature of xi over the mask
};

// Evaluates xi on cell centers masked by the annulus
// Sigma_{r0 - 1/n} \ Sigma_{r1}, i.e. r1 < |zeta_-| < r0 - 1/n.
// With check_regime set, throws RegimeViolation when the (n, delta, r0)
// triple fails the parameter-range test at the given threshold.
DensityField density_field(const SymbolParams& p, int n, double delta,
                           const GridSpec& grid, double r0, double r1,
                           int workers = 1, bool check_regime = false,
                           double threshold = 0.2);

// Deterministic sample points z = f_{a,b}(rho e^{i theta}) with rho uniform
// in [rho_lo, rho_hi] and theta uniform in [0, 2 pi); |zeta_-(z)| = rho.
std::vector<Complex> sample_annulus(const SymbolParams& p, int count,
                                    double rho_lo, double rho_hi,
                                    std::uint64_t seed);

}  // namespace toeplab
