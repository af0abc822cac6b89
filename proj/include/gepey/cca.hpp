#pragma once

#include <cstddef>
#include <vector>

#include "gepey/gep.hpp"
#include "gepey/multiview.hpp"

namespace gepey {

// Covariance description of a multiview distribution: per-view variances and
// the upper-triangle cross blocks (cross[i][j] only used for j > i).
struct CovarianceModel {
    std::vector<Matrix> var;
    std::vector<std::vector<Matrix>> cross;

    std::size_t view_count() const { return var.size(); }
};

CovarianceModel empirical_model(const MultiviewBatch& batch);

// Block pencil of the correlation family: A carries the cross blocks with a
// zero diagonal, B interpolates each diagonal block between the view
// variance (alpha 0) and the identity (alpha 1). A positive jitter retries a
// failed positive-definiteness gate with jitter*trace(B)/D added to B's
// diagonal; jitter 0 propagates the failure.
GepPair build_gep(const CovarianceModel& model, const std::vector<double>& alpha,
                  double jitter = 0.0);
GepPair build_gep(const MultiviewBatch& batch, const std::vector<double>& alpha,
                  double jitter = 0.0);

struct CcaResult {
    Spectrum spectrum;
    WeightSet weights;
};

// Top-K correlation structure by direct eigendecomposition. For two views
// the pencil-normalized weights are rescaled by sqrt(2) so that each view's
// projections have unit variance under its own (ridge) metric; with more
// views the joint normalization U^T B U = I is kept.
CcaResult cca_exact(const MultiviewBatch& batch, std::size_t k, const std::vector<double>& alpha,
                    double jitter = 0.0);
CcaResult cca_exact(const CovarianceModel& model, std::size_t k, const std::vector<double>& alpha,
                    double jitter = 0.0);

// Gradient of the two-batch subspace loss, one block per view, computed
// without any D x D product. Exactly equals the dense-covariance gradient.
std::vector<Matrix> fast_linear_gradient(const MultiviewBatch& batch, const MultiviewBatch& batch2,
                                         const WeightSet& weights);

// Pencil actions straight from a batch, O(M K D) per call. v is stacked.
Matrix apply_cross_cov(const MultiviewBatch& batch, const Matrix& v);
Matrix apply_ridge_var(const MultiviewBatch& batch, const std::vector<double>& alpha,
                       const Matrix& v);

// Proportion of correlation captured. Learned values are clamped at zero
// individually before summing; the oracle must have a positive sum.
double metric_pcc(const Spectrum& learned, const Spectrum& oracle);

// Correlation spectrum of the projected representations, via the small
// K-dimensional problem on full-batch covariances.
Spectrum representation_spectrum(const MultiviewBatch& batch, const WeightSet& weights,
                                 double jitter = 0.0);

// Total correlation captured: sum of the top-k canonical correlations
// between two representation matrices.
double metric_tcc(const Matrix& z1, const Matrix& z2, std::size_t k, double jitter = 0.0);

// Total multiview correlation captured: per component, the average
// correlation over ordered view pairs; summed over components. Components
// with vanishing variance contribute zero.
double metric_tmcc(const std::vector<Matrix>& zs);

struct InterlaceReport {
    bool ok = false;                // every projected value at most the original (slack 1e-8)
    bool all_equal = false;         // every gap below 1e-6: projection spans the top subspace
    std::vector<double> original;
    std::vector<double> projected;
    std::vector<double> gaps;       // original - projected, per component
    std::vector<bool> equality;     // gap below 1e-6, per component
};

// Element-wise comparison of the correlation spectrum before and after
// projecting each view through its (full column rank) projector.
InterlaceReport interlace_check(const MultiviewBatch& batch, const std::vector<Matrix>& projectors,
                                std::size_t k, double jitter = 0.0);

}  // namespace gepey
