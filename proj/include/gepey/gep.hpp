#pragma once

#include <cstddef>
#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

// Symmetric A and positive-definite B defining the pencil A u = lambda B u.
struct GepPair {
    Matrix a;
    Matrix b;
};

// Validates symmetry of both matrices (1e-10 relative) and positive
// definiteness of b via Cholesky.
GepPair make_gep_pair(Matrix a, Matrix b);

// Ordered generalized eigenvalues / canonical correlations, descending.
struct Spectrum {
    std::vector<double> values;

    double sum() const;
    std::size_t size() const { return values.size(); }
};

struct GepSolution {
    Spectrum spectrum;     // top-K generalized eigenvalues, descending
    Matrix vectors;        // D x K, B-orthonormal: U^T B U = I_K
};

// Top-K subspace of the pencil via whitening: eigendecompose
// S A S with S = (B + jitter I)^{-1/2} and map back. Column signs follow the
// sym_eig convention applied to the returned vectors.
GepSolution gep_solve(const GepPair& pair, std::size_t k, double jitter = 0.0);

}  // namespace gepey
