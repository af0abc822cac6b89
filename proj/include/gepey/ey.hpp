#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gepey/gep.hpp"
#include "gepey/multiview.hpp"
#include "gepey/optim.hpp"
#include "gepey/rng.hpp"

namespace gepey {

// Every evaluation satisfies loss = -reward + norm_penalty + orth_penalty.
struct EyEvaluation {
    double loss = 0.0;
    double reward = 0.0;          // 2 * trace of the cross term
    double norm_penalty = 0.0;    // diagonal part of the quartic term
    double orth_penalty = 0.0;    // off-diagonal part of the quartic term
    Matrix gradient;              // same layout as the weights; stacked for multiview
};

// Subspace loss trace(-2 U^T A U + (U^T B U)^2); minimized exactly by
// B-orthonormal top-K eigenvector matrices scaled by sqrt of the eigenvalues,
// where it equals minus the sum of squared top-K eigenvalues.
EyEvaluation ey_loss(const GepPair& pair, const Matrix& u);

// Unbiased two-batch estimate of the population loss for the multiview
// pencil selected by alpha. The trace term uses batch 1 only; the quartic
// term pairs the two batches. Cost is O(M K D) per call; no D x D matrix is
// ever formed.
EyEvaluation ey_loss_stochastic(const MultiviewBatch& batch, const MultiviewBatch& batch2,
                                const WeightSet& weights);

// Per-view blocks of ey_loss_stochastic's gradient.
std::vector<Matrix> ey_gradients_per_view(const MultiviewBatch& batch,
                                          const MultiviewBatch& batch2,
                                          const WeightSet& weights);

// Loss decomposition and gradients taken at the representations themselves.
// raw1 and raw2 hold uncentered M x K blocks per view. weight_grams supplies
// U^T U per view for the alpha part of the metric; required whenever some
// alpha is nonzero. The g blocks are gradients with respect to the raw
// inputs; they have zero column sums, so centering adds nothing on top.
struct RepresentationCore {
    EyEvaluation eval;           // gradient left empty
    std::vector<Matrix> g1, g2;  // dL/dZ per view, batch 1 and batch 2
    Matrix vsum;                 // both quartic metric estimates added
};

RepresentationCore representation_core(const std::vector<Matrix>& raw1,
                                       const std::vector<Matrix>& raw2,
                                       const std::vector<double>& alpha,
                                       const std::vector<Matrix>* weight_grams);

// One descent step from dense estimates, with B estimated twice so the
// quartic term stays unbiased:
//   U - lr * (-4 a_hat U + 2 b_hat U (U^T b_hat2 U) + 2 b_hat2 U (U^T b_hat U))
Matrix ey_gradient_update(const Matrix& u, const Matrix& a_hat, const Matrix& b_hat,
                          const Matrix& b_hat2, double lr);

struct TraceRow {
    std::size_t step = 0;
    double loss = 0.0;
    double reward = 0.0;
    double norm_penalty = 0.0;
    double orth_penalty = 0.0;
};

struct TrainConfig {
    std::size_t steps = 0;       // hard cap on update count; 0 means uncapped
    std::size_t epochs = 0;      // full passes (stochastic mode)
    std::size_t batch_size = 0;  // stochastic mode only
    bool iid_batches = false;    // resample batches instead of epoch pairing
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
};

// Entries i.i.d. N(0, 1/d); keeps initial quartic terms small.
Matrix gaussian_init(std::size_t d, std::size_t k, Rng& rng);

struct FullBatchResult {
    Matrix weights;
    std::vector<TraceRow> trace;  // one row per step (pre-update) plus a final row
};

// Gradient descent on ey_loss with exact pair matrices; budget is
// config.steps. steps = 0 returns the initial weights.
FullBatchResult train_full_batch(const GepPair& pair, std::size_t k, const TrainConfig& config);

struct StochasticResult {
    WeightSet weights;
    std::vector<TraceRow> trace;  // one row per executed step, batch evaluations
};

// Two-batch stochastic training loop. Default pairing: each epoch shuffles
// the sample indices once and consumes disjoint consecutive blocks as the
// independent pair. iid_batches instead redraws both batches every step.
StochasticResult train_stochastic(const MultiviewBatch& data, std::size_t k,
                                  const std::vector<double>& alpha, const TrainConfig& config);

struct ExtractedSpectrum {
    Spectrum spectrum;  // Rayleigh values of the span, descending
    Matrix vectors;     // D x K, B-orthonormal, spanning span(u_hat)
};

// Eigenstructure of the pencil restricted to span(u_hat), via the K x K
// projected problem. At a loss minimizer this recovers the top-K
// eigenvalues; anywhere it interlaces them from below.
ExtractedSpectrum extract_spectrum(const GepPair& pair, const Matrix& u_hat);

}  // namespace gepey
