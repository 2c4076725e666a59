#pragma once

#include <complex>
#include <utility>

#include "toeplab/errors.hpp"

namespace toeplab {

using Complex = std::complex<double>;

// Relative tolerance for the OnCurve / OnFocalSegment decisions. Quadratic
// roots in double precision are good to ~1e-14, so 1e-9 is safely above.
inline constexpr double kCurveTol = 1e-9;

// Nonzero Toeplitz coefficients with |a| >= |b| after normalize(). P and its
// transpose share a spectrum, so exchanging a and b changes nothing spectral;
// the swapped flag records whether that exchange happened.
struct SymbolParams {
    Complex a;             // superdiagonal coefficient
    Complex b;             // subdiagonal coefficient
    bool swapped = false;  // true iff inputs were exchanged

    Complex ratio() const { return b / a; }                       // b/a
    double r_min() const;                                         // sqrt(|b|/|a|)
    double geometry_scale() const { return std::abs(a) + std::abs(b); }
};

// Orders (a, b) so |a| >= |b|. Throws ZeroCoefficient if either vanishes.
SymbolParams normalize(Complex a, Complex b);

// p(xi) = a e^{i xi} + b e^{-i xi}
Complex symbol_eval(const SymbolParams& p, double xi);

// f_{a,b}(zeta) = a zeta + b / zeta. Throws ZeroArgument at zeta = 0.
Complex f_eval(const SymbolParams& p, Complex zeta);

// The common foci +-2 sqrt(ab) of the confocal family, principal branch.
std::pair<Complex, Complex> focal_points(const SymbolParams& p);

// Confocal ellipse E_r = f_{a,b}(|zeta| = r).
// minor is the signed value |a| r - |b|/r; it is >= 0 for r >= r_min and
// degenerates to the focal segment exactly at r = r_min.
struct EllipseGeometry {
    double r;
    double major;      // |a| r + |b| / r
    double minor;      // |a| r - |b| / r
    double direction;  // (arg a + arg b) / 2
    std::pair<Complex, Complex> foci;
};

EllipseGeometry ellipse_geometry(const SymbolParams& p, double r);

// The two roots of a zeta^2 - z zeta + b = 0 with |zeta_plus| <= |zeta_minus|.
// They satisfy zeta_+ zeta_- = b/a and zeta_+ + zeta_- = z/a, and are
// continuous in z away from the focal segment.
struct BranchPair {
    Complex zeta_plus;
    Complex zeta_minus;
    Complex z;
};

BranchPair solve_characteristic(const SymbolParams& p, Complex z);

enum class PointClass { Interior, OnCurve, Exterior, OnFocalSegment };

// Position of z relative to the ellipse E_r, decided through |zeta_-(z)|.
// Requires r >= r_min (RadiusBelowMinimum otherwise).
PointClass classify(const SymbolParams& p, Complex z, double r);

// Euclidean distance from z to the focal segment [-2 sqrt(ab), 2 sqrt(ab)].
double focal_segment_distance(const SymbolParams& p, Complex z);

}  // namespace toeplab
