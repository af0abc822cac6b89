#pragma once

#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

struct SymEigResult {
    // Descending. Ties keep the pre-sort (Jacobi diagonal) order.
    std::vector<double> eigenvalues;
    // Columns are orthonormal eigenvectors; the first component of each
    // column whose magnitude exceeds a tiny floor is made positive, so the
    // result is reproducible.
    Matrix eigenvectors;
};

// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
// Throws NotSymmetric (relative tolerance 1e-10) or NonFinite.
SymEigResult sym_eig(const Matrix& m);

// First component of each column with magnitude above 1e-12 is made positive.
void fix_column_signs(Matrix& q);

// Lower-triangular L with L L^T = a. Throws NotPositiveDefinite.
Matrix cholesky(const Matrix& a);

// Symmetric inverse square root of b + jitter*I. The Cholesky factorization
// is the positive-definiteness gate; the value is built from the
// eigendecomposition so that S is symmetric and S*(b+jitter*I)*S = I.
Matrix chol_inv_sqrt(const Matrix& b, double jitter);

// Symmetric square root via eigendecomposition; eigenvalues must be >= 0.
Matrix sym_sqrt(const Matrix& a);

}  // namespace gepey
