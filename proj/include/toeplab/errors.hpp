#pragma once

#include <stdexcept>
#include <string>

namespace toeplab {

// Base of all toeplab errors so callers can catch the whole family at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define TOEPLAB_ERROR_TYPE(Name)                                               \
    struct Name : Error {                                                      \
        using Error::Error;                                                    \
    }

TOEPLAB_ERROR_TYPE(ZeroCoefficient);     // symbol coefficient a or b is zero
TOEPLAB_ERROR_TYPE(ZeroArgument);        // f_{a,b} evaluated at zeta = 0
TOEPLAB_ERROR_TYPE(NonPositiveRadius);   // ellipse family parameter r <= 0
TOEPLAB_ERROR_TYPE(RadiusBelowMinimum);  // classify() called with r < r_min
TOEPLAB_ERROR_TYPE(DegenerateRoots);     // zeta_- == zeta_+ (focal point)
TOEPLAB_ERROR_TYPE(OutsideDomain);       // |zeta_-| >= 1, outside E_1
TOEPLAB_ERROR_TYPE(StepTooLarge);        // finite-difference step too coarse
TOEPLAB_ERROR_TYPE(RegimeViolation);     // parameter range check failed
TOEPLAB_ERROR_TYPE(Infeasible);          // no admissible r0 exists
TOEPLAB_ERROR_TYPE(DimensionTooSmall);   // matrix dimension below minimum
TOEPLAB_ERROR_TYPE(ConvergenceFailure);  // dense eigensolver did not converge

#undef TOEPLAB_ERROR_TYPE

}  // namespace toeplab
