#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "gepey/eig.hpp"
#include "gepey/gep.hpp"
#include "gepey/matrix.hpp"
#include "gepey/rng.hpp"
#include "gepey/svd.hpp"

namespace gepey::test {

inline Matrix random_sym(std::size_t d, Rng& rng) {
    return symmetrized(rng.gaussian_matrix(d, d));
}

inline Matrix random_spd(std::size_t d, Rng& rng) {
    const Matrix r = rng.gaussian_matrix(d, d);
    Matrix b = mul_at_b(r, r);
    for (double& v : b.data) v /= double(d);
    for (std::size_t i = 0; i < d; ++i) b(i, i) += 1.0;
    return b;
}

inline GepPair random_pencil(std::size_t d, Rng& rng) {
    return make_gep_pair(random_sym(d, rng), random_spd(d, rng));
}

// Pencil with the exact spectrum handed in: A = B^{1/2} Q diag(s) Q^T B^{1/2}
// for a random orthogonal Q, so (A, B) has eigenvalues s by whitening.
inline GepPair planted_pencil(std::size_t d, const std::vector<double>& spectrum, Rng& rng) {
    const Matrix b = random_spd(d, rng);
    const Matrix root = sym_sqrt(b);
    const Matrix q = orthonormal_range(rng.gaussian_matrix(d, d));
    Matrix scaled = q;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) scaled(r, c) *= spectrum[c];
    const Matrix a = root * symmetrized(mul_a_bt(scaled, q)) * root;
    return make_gep_pair(symmetrized(a), b);
}

// Central finite differences of a scalar function of one matrix argument.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& at,
                          double eps = 1e-5) {
    Matrix g(at.rows, at.cols);
    Matrix x = at;
    for (std::size_t j = 0; j < x.data.size(); ++j) {
        const double keep = x.data[j];
        x.data[j] = keep + eps;
        const double up = f(x);
        x.data[j] = keep - eps;
        const double down = f(x);
        x.data[j] = keep;
        g.data[j] = (up - down) / (2.0 * eps);
    }
    return g;
}

// Norm-relative gradient error with a unit floor, robust near zero.
inline double grad_rel_err(const Matrix& analytic, const Matrix& fd) {
    double diff2 = 0.0;
    for (std::size_t j = 0; j < analytic.data.size(); ++j) {
        const double d = analytic.data[j] - fd.data[j];
        diff2 += d * d;
    }
    const double scale = std::max({1.0, frobenius_norm(analytic), frobenius_norm(fd)});
    return std::sqrt(diff2) / scale;
}

inline double max_angle(const std::vector<double>& angles) {
    double m = 0.0;
    for (double a : angles) m = std::max(m, a);
    return m;
}

}  // namespace gepey::test
