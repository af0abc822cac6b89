#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gepey/cca.hpp"
#include "gepey/gep.hpp"
#include "gepey/multiview.hpp"

namespace gepey {

struct GaussianInstance {
    MultiviewBatch batch;
    CovarianceModel population;    // exact covariances of the sampler
    Spectrum oracle;               // population pencil values, descending
    std::vector<Matrix> loadings;  // per-view orthonormal signal directions, D_i x K
};

// Multiview Gaussian with unit variance in every view and canonical
// correlations exactly rho across each view pair: a shared K-factor latent
// drives all views through orthonormal loadings, and the per-view noise is
// reshaped inside the signal span so Var(X_i) = I exactly. Pencil values are
// (views - 1) * rho_k.
GaussianInstance gen_gaussian(const std::vector<std::size_t>& dims, std::size_t k,
                              const std::vector<double>& rho, std::size_t n, std::uint64_t seed);

struct AugmentedInstance {
    MultiviewBatch batch;
    CovarianceModel population;
    Spectrum oracle;  // correlations mu_k / (mu_k + c), descending
};

// Two views made by independent identically distributed corruptions of one
// base sample: X_i = x + noise * (G_i x / sqrt(D) + eps_i) with a shared base
// x ~ N(0, diag(1/k)) and per-view random linear maps G_i. The cross
// covariance equals Var(x), so it is positive semidefinite by construction;
// with c = noise^2 (1 + trace(Var(x))/D) the correlations are
// (1/k) / (1/k + c).
AugmentedInstance gen_augmented(std::size_t d, std::size_t n, double noise, std::uint64_t seed);

}  // namespace gepey
