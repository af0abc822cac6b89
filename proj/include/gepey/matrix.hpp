#pragma once

#include <cstddef>
#include <vector>

#include "gepey/errors.hpp"

namespace gepey {

// Dense row-major matrix of 64-bit floats. Value semantics; invariant
// rows*cols == data.size() is established by the constructors and preserved
// by every operation here.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> d);

    static Matrix identity(std::size_t n);
    static Matrix diag(const std::vector<double>& d);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Matrix transpose(const Matrix& a);
// a^T * b without materializing the transpose.
Matrix mul_at_b(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix mul_a_bt(const Matrix& a, const Matrix& b);

double trace(const Matrix& a);
double frobenius_inner(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& a);
// Symmetry to a tolerance relative to the largest entry magnitude.
bool is_symmetric(const Matrix& a, double rel_tol);
Matrix symmetrized(const Matrix& a);

std::vector<double> get_col(const Matrix& a, std::size_t c);
void set_col(Matrix& a, std::size_t c, const std::vector<double>& v);
Matrix block(const Matrix& a, std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc);
void set_block(Matrix& a, std::size_t r0, std::size_t c0, const Matrix& b);
// First k columns.
Matrix left_cols(const Matrix& a, std::size_t k);

// Subtract each column's mean. Centered columns sum to zero exactly up to
// rounding; this is the only centering used anywhere.
Matrix center_columns(const Matrix& a);

// Unbiased sample cross-covariance: columns mean-centered, divisor M-1.
// xa is M x p, xb is M x q, result p x q. Throws TooFewSamples for M < 2.
Matrix empirical_cov(const Matrix& xa, const Matrix& xb);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

}  // namespace gepey
