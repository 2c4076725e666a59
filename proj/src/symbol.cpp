#include "toeplab/symbol.hpp"

#include <algorithm>
#include <cmath>

namespace toeplab {

double SymbolParams::r_min() const { return std::sqrt(std::abs(b) / std::abs(a)); }

SymbolParams normalize(Complex a, Complex b) {
    if (a == Complex(0) || b == Complex(0)) {
        throw ZeroCoefficient("normalize: both coefficients must be nonzero");
    }
    if (std::abs(a) >= std::abs(b)) return {a, b, false};
    return {b, a, true};
}

Complex symbol_eval(const SymbolParams& p, double xi) {
    Complex e = std::polar(1.0, xi);
    return p.a * e + p.b * std::conj(e);
}

Complex f_eval(const SymbolParams& p, Complex zeta) {
    if (zeta == Complex(0)) {
        throw ZeroArgument("f_eval: zeta must be nonzero");
    }
    return p.a * zeta + p.b / zeta;
}

std::pair<Complex, Complex> focal_points(const SymbolParams& p) {
    Complex f = 2.0 * std::sqrt(p.a * p.b);
    return {f, -f};
}

EllipseGeometry ellipse_geometry(const SymbolParams& p, double r) {
    if (!(r > 0)) {
        throw NonPositiveRadius("ellipse_geometry: r must be positive");
    }
    EllipseGeometry e;
    e.r = r;
    e.major = std::abs(p.a) * r + std::abs(p.b) / r;
    e.minor = std::abs(p.a) * r - std::abs(p.b) / r;
    e.direction = (std::arg(p.a) + std::arg(p.b)) / 2;
    e.foci = focal_points(p);
    return e;
}

BranchPair solve_characteristic(const SymbolParams& p, Complex z) {
    const Complex s = z / p.a;       // zeta_+ + zeta_-
    const Complex q = p.b / p.a;     // zeta_+ zeta_-
    const Complex d = std::sqrt(s * s - 4.0 * q);
    // Sign-matched root: avoids cancellation when |s| is large.
    const double dot = s.real() * d.real() + s.imag() * d.imag();
    const Complex big = (dot >= 0 ? s + d : s - d) * 0.5;
    const Complex other = q / big;

    Complex zm = big, zp = other;
    const double am = std::abs(zm), ap = std::abs(zp);
    if (ap > am) std::swap(zm, zp);
    if (std::abs(am - ap) <= 1e-12 * (am + ap)) {
        // Focal-segment tie: keep Im(zeta_- / sqrt(b/a)) >= 0.
        Complex ref = std::sqrt(q);
        if (ref != Complex(0) && (zm / ref).imag() < 0 && (zp / ref).imag() >= 0) {
            std::swap(zm, zp);
        }
    }
    return {zp, zm, z};
}

PointClass classify(const SymbolParams& p, Complex z, double r) {
    const double rmin = p.r_min();
    if (r < rmin * (1 - 1e-12)) {
        throw RadiusBelowMinimum("classify: r below sqrt(|b|/|a|)");
    }
    auto bp = solve_characteristic(p, z);
    const double am = std::abs(bp.zeta_minus);
    const double ap = std::abs(bp.zeta_plus);
    if (am - ap <= kCurveTol * am) return PointClass::OnFocalSegment;
    if (std::abs(am - r) <= kCurveTol * r) return PointClass::OnCurve;
    return am < r ? PointClass::Interior : PointClass::Exterior;
}

double focal_segment_distance(const SymbolParams& p, Complex z) {
    const Complex f = focal_points(p).first;
    const double f2 = std::norm(f);
    if (f2 == 0) return std::abs(z);
    double t = (z.real() * f.real() + z.imag() * f.imag()) / f2;
    t = std::clamp(t, -1.0, 1.0);
    return std::abs(z - t * f);
}

}  // namespace toeplab
