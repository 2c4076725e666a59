#pragma once

#include <Eigen/Dense>
#include <vector>

#include "toeplab/symbol.hpp"

namespace toeplab {

// Dense nonsymmetric eigenvalues of m, counted with multiplicity.
// balance enables the diagonal similarity scaling of the underlying LAPACK
// routine; for the unperturbed bidiagonal Toeplitz matrix that scaling
// restores normality and hence full accuracy, while balance = false
// reproduces the instability of the raw QR iteration.
// Throws ConvergenceFailure if the QR iteration fails.
// Safe for concurrent calls; the backing BLAS is pinned to one thread.
std::vector<Complex> eigenvalues(const Eigen::MatrixXcd& m, bool balance = true);

}  // namespace toeplab
