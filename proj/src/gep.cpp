#include "gepey/gep.hpp"

#include <utility>

#include "gepey/eig.hpp"

namespace gepey {

GepPair make_gep_pair(Matrix a, Matrix b) {
    if (a.rows != a.cols || b.rows != b.cols || a.rows != b.rows)
        throw ShapeMismatch("make_gep_pair: matrices must be square and equally sized");
    if (!all_finite(a) || !all_finite(b)) throw NonFinite("make_gep_pair: non-finite entries");
    if (!is_symmetric(a, 1e-10)) throw NotSymmetric("make_gep_pair: A not symmetric");
    if (!is_symmetric(b, 1e-10)) throw NotSymmetric("make_gep_pair: B not symmetric");
    cholesky(b);
    return GepPair{std::move(a), std::move(b)};
}

double Spectrum::sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

GepSolution gep_solve(const GepPair& pair, std::size_t k, double jitter) {
    const std::size_t d = pair.a.rows;
    if (pair.a.cols != d || pair.b.rows != d || pair.b.cols != d)
        throw ShapeMismatch("gep_solve: matrices must be square and equally sized");
    if (k > d) throw KTooLarge("gep_solve: K exceeds dimension");
    if (!is_symmetric(pair.a, 1e-10)) throw NotSymmetric("gep_solve: A not symmetric");

    const Matrix s = chol_inv_sqrt(pair.b, jitter);
    const Matrix whitened = symmetrized(s * pair.a * s);
    const SymEigResult eig = sym_eig(whitened);

    GepSolution sol;
    sol.spectrum.values.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + k);
    sol.vectors = s * left_cols(eig.eigenvectors, k);
    fix_column_signs(sol.vectors);
    return sol;
}

}  // namespace gepey
