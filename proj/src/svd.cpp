#include "gepey/svd.hpp"

#include <algorithm>
#include <cmath>

#include "gepey/eig.hpp"

namespace gepey {

namespace {

// Append orthonormal columns to u (rows x filled) until it has want columns.
// Candidates are identity vectors, Gram-Schmidt'd against what is there; the
// scan order makes the completion deterministic.
void complete_orthonormal(Matrix& u, std::size_t filled, std::size_t want) {
    std::size_t next_axis = 0;
    for (std::size_t c = filled; c < want; ++c) {
        std::vector<double> cand(u.rows, 0.0);
        while (true) {
            if (next_axis >= u.rows)
                throw RankDeficient("complete_orthonormal: ran out of directions");
            std::fill(cand.begin(), cand.end(), 0.0);
            cand[next_axis++] = 1.0;
            for (std::size_t j = 0; j < c; ++j) {
                double proj = 0.0;
                for (std::size_t r = 0; r < u.rows; ++r) proj += u(r, j) * cand[r];
                for (std::size_t r = 0; r < u.rows; ++r) cand[r] -= proj * u(r, j);
            }
            const double n = norm2(cand);
            if (n > 1e-8) {
                for (std::size_t r = 0; r < u.rows; ++r) u(r, c) = cand[r] / n;
                break;
            }
        }
    }
}

SvdResult svd_tall(const Matrix& a) {
    // rows >= cols; eigendecompose the small Gram matrix.
    const std::size_t r = a.cols;
    const SymEigResult eig = sym_eig(symmetrized(mul_at_b(a, a)));

    SvdResult out;
    out.v = eig.eigenvectors;
    out.singular_values.resize(r);
    out.u = Matrix(a.rows, r);
    const double smax = eig.eigenvalues.empty() ? 0.0 : std::sqrt(std::max(eig.eigenvalues[0], 0.0));
    std::size_t filled = 0;
    for (std::size_t i = 0; i < r; ++i) {
        const double s = std::sqrt(std::max(eig.eigenvalues[i], 0.0));
        out.singular_values[i] = s;
        if (s > smax * 1e-12 && s > 0.0) {
            if (i != filled) throw RankDeficient("svd: singular values out of order");
            const std::vector<double> vi = get_col(out.v, i);
            std::vector<double> ui(a.rows, 0.0);
            for (std::size_t row = 0; row < a.rows; ++row) {
                double acc = 0.0;
                for (std::size_t col = 0; col < a.cols; ++col) acc += a(row, col) * vi[col];
                ui[row] = acc / s;
            }
            set_col(out.u, i, ui);
            ++filled;
        }
    }
    complete_orthonormal(out.u, filled, r);
    fix_column_signs(out.u);
    // Keep a = u s v^T after the sign fix: columns of v follow u's flips.
    for (std::size_t i = 0; i < filled; ++i) {
        const std::vector<double> vi = get_col(out.v, i);
        std::vector<double> avi(a.rows, 0.0);
        for (std::size_t row = 0; row < a.rows; ++row) {
            double acc = 0.0;
            for (std::size_t col = 0; col < a.cols; ++col) acc += a(row, col) * vi[col];
            avi[row] = acc;
        }
        double along = 0.0;
        for (std::size_t row = 0; row < a.rows; ++row) along += avi[row] * out.u(row, i);
        if (along < 0.0)
            for (std::size_t row = 0; row < out.v.rows; ++row) out.v(row, i) = -out.v(row, i);
    }
    return out;
}

}  // namespace

SvdResult svd(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) throw ShapeMismatch("svd: empty matrix");
    if (!all_finite(a)) throw NonFinite("svd: non-finite entries");
    if (a.rows >= a.cols) return svd_tall(a);
    SvdResult t = svd_tall(transpose(a));
    return SvdResult{std::move(t.v), std::move(t.singular_values), std::move(t.u)};
}

std::size_t numeric_rank(const std::vector<double>& singular_values, double rel_tol) {
    if (singular_values.empty()) return 0;
    const double cut = rel_tol * singular_values.front();
    std::size_t r = 0;
    for (double s : singular_values)
        if (s > cut && s > 0.0) ++r;
    return r;
}

std::size_t numeric_rank(const Matrix& a, double rel_tol) {
    return numeric_rank(svd(a).singular_values, rel_tol);
}

Matrix orthonormal_range(const Matrix& a, double rel_tol) {
    const SvdResult s = svd(a);
    return left_cols(s.u, numeric_rank(s.singular_values, rel_tol));
}

std::vector<double> principal_angles(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw ShapeMismatch("principal_angles: ambient dimensions differ");
    const Matrix qa = orthonormal_range(a);
    const Matrix qb = orthonormal_range(b);
    const SvdResult cross = svd(mul_at_b(qa, qb));
    std::vector<double> angles;
    angles.reserve(cross.singular_values.size());
    for (double s : cross.singular_values) angles.push_back(std::acos(std::clamp(s, 0.0, 1.0)));
    std::sort(angles.begin(), angles.end());
    return angles;
}

}  // namespace gepey
