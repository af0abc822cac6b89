#include "gepey/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gepey {

namespace {

double off_diag_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.rows; ++p)
        for (std::size_t q = p + 1; q < a.cols; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
}

}  // namespace

// Make the first non-negligible component of each column positive.
void fix_column_signs(Matrix& q) {
    for (std::size_t c = 0; c < q.cols; ++c) {
        for (std::size_t r = 0; r < q.rows; ++r) {
            const double v = q(r, c);
            if (std::fabs(v) > 1e-12) {
                if (v < 0.0)
                    for (std::size_t i = 0; i < q.rows; ++i) q(i, c) = -q(i, c);
                break;
            }
        }
    }
}

SymEigResult sym_eig(const Matrix& m) {
    if (m.rows != m.cols) throw ShapeMismatch("sym_eig: matrix not square");
    if (!all_finite(m)) throw NonFinite("sym_eig: non-finite entries");
    if (!is_symmetric(m, 1e-10)) throw NotSymmetric("sym_eig: matrix not symmetric");

    const std::size_t n = m.rows;
    Matrix a = symmetrized(m);
    Matrix v = Matrix::identity(n);

    const double scale = std::max(frobenius_norm(a), 1e-300);
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_diag_norm(a) <= 1e-15 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymEigResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) res.eigenvectors(i, k) = v(i, order[k]);
    }
    fix_column_signs(res.eigenvectors);
    return res;
}

Matrix cholesky(const Matrix& a) {
    if (a.rows != a.cols) throw ShapeMismatch("cholesky: matrix not square");
    const std::size_t n = a.rows;
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw NotPositiveDefinite("cholesky: matrix not positive definite");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

Matrix chol_inv_sqrt(const Matrix& b, double jitter) {
    if (b.rows != b.cols) throw ShapeMismatch("chol_inv_sqrt: matrix not square");
    if (!is_symmetric(b, 1e-10)) throw NotSymmetric("chol_inv_sqrt: matrix not symmetric");
    Matrix bj = b;
    for (std::size_t i = 0; i < bj.rows; ++i) bj(i, i) += jitter;

    cholesky(bj);

    const SymEigResult eig = sym_eig(bj);
    for (double ev : eig.eigenvalues)
        if (!(ev > 0.0)) throw NotPositiveDefinite("chol_inv_sqrt: nonpositive eigenvalue");

    const std::size_t n = bj.rows;
    Matrix scaled = eig.eigenvectors;
    for (std::size_t j = 0; j < n; ++j) {
        const double f = 1.0 / std::sqrt(eig.eigenvalues[j]);
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= f;
    }
    return mul_a_bt(scaled, eig.eigenvectors);
}

Matrix sym_sqrt(const Matrix& a) {
    const SymEigResult eig = sym_eig(a);
    const std::size_t n = a.rows;
    Matrix scaled = eig.eigenvectors;
    for (std::size_t j = 0; j < n; ++j) {
        const double ev = eig.eigenvalues[j];
        if (ev < -1e-10) throw NotPositiveDefinite("sym_sqrt: negative eigenvalue");
        const double f = std::sqrt(std::max(ev, 0.0));
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= f;
    }
    return mul_a_bt(scaled, eig.eigenvectors);
}

}  // namespace gepey
