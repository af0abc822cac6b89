#include "gepey/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace gepey {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> d)
    : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols) throw ShapeMismatch("matrix data length does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const std::vector<double>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("add: shapes differ");
    Matrix r = a;
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] += b.data[i];
    return r;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("sub: shapes differ");
    Matrix r = a;
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
    return r;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeMismatch("mul: inner dimensions differ");
    Matrix r(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        double* rrow = &r.data[i * b.cols];
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) rrow[j] += aik * brow[j];
        }
    }
    return r;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix r = a;
    for (double& v : r.data) v *= s;
    return r;
}

Matrix transpose(const Matrix& a) {
    Matrix r(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) r(j, i) = a(i, j);
    return r;
}

Matrix mul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw ShapeMismatch("mul_at_b: row counts differ");
    Matrix r(a.cols, b.cols);
    for (std::size_t m = 0; m < a.rows; ++m) {
        const double* arow = &a.data[m * a.cols];
        const double* brow = &b.data[m * b.cols];
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double ami = arow[i];
            if (ami == 0.0) continue;
            double* rrow = &r.data[i * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) rrow[j] += ami * brow[j];
        }
    }
    return r;
}

Matrix mul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ShapeMismatch("mul_a_bt: col counts differ");
    Matrix r(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = &b.data[j * b.cols];
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            r(i, j) = s;
        }
    }
    return r;
}

double trace(const Matrix& a) {
    double s = 0.0;
    const std::size_t n = std::min(a.rows, a.cols);
    for (std::size_t i = 0; i < n; ++i) s += a(i, i);
    return s;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("frobenius_inner: shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_inner(a, a)); }

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

bool all_finite(const Matrix& a) {
    for (double v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

bool is_symmetric(const Matrix& a, double rel_tol) {
    if (a.rows != a.cols) return false;
    const double scale = std::max(max_abs(a), 1.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = i + 1; j < a.cols; ++j)
            if (std::fabs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    return true;
}

Matrix symmetrized(const Matrix& a) {
    if (a.rows != a.cols) throw ShapeMismatch("symmetrized: matrix not square");
    Matrix r = a;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
    return r;
}

std::vector<double> get_col(const Matrix& a, std::size_t c) {
    std::vector<double> v(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) v[i] = a(i, c);
    return v;
}

void set_col(Matrix& a, std::size_t c, const std::vector<double>& v) {
    if (v.size() != a.rows) throw ShapeMismatch("set_col: length differs from row count");
    for (std::size_t i = 0; i < a.rows; ++i) a(i, c) = v[i];
}

Matrix block(const Matrix& a, std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) {
    if (r0 + nr > a.rows || c0 + nc > a.cols) throw ShapeMismatch("block: out of range");
    Matrix r(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) r(i, j) = a(r0 + i, c0 + j);
    return r;
}

void set_block(Matrix& a, std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows > a.rows || c0 + b.cols > a.cols) throw ShapeMismatch("set_block: out of range");
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) a(r0 + i, c0 + j) = b(i, j);
}

Matrix left_cols(const Matrix& a, std::size_t k) { return block(a, 0, 0, a.rows, k); }

Matrix center_columns(const Matrix& a) {
    Matrix r = a;
    for (std::size_t j = 0; j < a.cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) mean += a(i, j);
        mean /= static_cast<double>(a.rows);
        for (std::size_t i = 0; i < a.rows; ++i) r(i, j) -= mean;
    }
    return r;
}

Matrix empirical_cov(const Matrix& xa, const Matrix& xb) {
    if (xa.rows != xb.rows) throw ShapeMismatch("empirical_cov: sample counts differ");
    if (xa.rows < 2) throw TooFewSamples("empirical_cov: need at least 2 samples");
    const Matrix ca = center_columns(xa);
    const Matrix cb = center_columns(xb);
    Matrix c = mul_at_b(ca, cb);
    const double scale = 1.0 / static_cast<double>(xa.rows - 1);
    for (double& v : c.data) v *= scale;
    return c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeMismatch("dot: lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace gepey
