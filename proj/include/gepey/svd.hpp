#pragma once

#include <cstddef>
#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

// Thin SVD a = u * diag(s) * v^T with r = min(rows, cols) columns in u and v.
// Columns of u and v are orthonormal even where s is (numerically) zero; the
// null-space columns are completed deterministically.
struct SvdResult {
    Matrix u;
    std::vector<double> singular_values;  // descending, >= 0
    Matrix v;
};

SvdResult svd(const Matrix& a);

// Count of singular values above rel_tol times the largest.
std::size_t numeric_rank(const std::vector<double>& singular_values, double rel_tol = 1e-8);
std::size_t numeric_rank(const Matrix& a, double rel_tol = 1e-8);

// Orthonormal basis of the column space (numeric rank columns).
Matrix orthonormal_range(const Matrix& a, double rel_tol = 1e-8);

// Principal angles (radians, ascending) between the column spans of a and b.
// Both are orthonormalized first, so any full-rank representatives work.
std::vector<double> principal_angles(const Matrix& a, const Matrix& b);

}  // namespace gepey
