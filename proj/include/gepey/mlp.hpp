#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gepey/ey.hpp"
#include "gepey/matrix.hpp"
#include "gepey/multiview.hpp"
#include "gepey/rng.hpp"

namespace gepey {

enum class Activation { relu, identity };

struct Layer {
    Matrix weight;             // fan_in x fan_out
    std::vector<double> bias;  // fan_out
    Activation activation = Activation::identity;
};

// Small feed-forward net. The final layer stays linear so the top of the
// network is an exact linear read-out of the penultimate features.
struct Mlp {
    std::vector<Layer> layers;
    std::size_t input_dim() const { return layers.front().weight.rows; }
    std::size_t output_dim() const { return layers.back().weight.cols; }
};

// Consecutive shapes chain, biases match widths, final activation identity.
void validate(const Mlp& mlp);

// Hidden layers relu with the given widths, final layer identity. Weights
// N(0, 1/fan_in), biases zero.
Mlp make_mlp(std::size_t input_dim, const std::vector<std::size_t>& widths,
             std::size_t output_dim, Rng& rng);

struct ForwardCache {
    std::vector<Matrix> inputs;  // the block fed to each layer
    Matrix output;
};

// Row-wise forward pass; fills the cache when given one.
Matrix forward(const Mlp& mlp, const Matrix& x, ForwardCache* cache = nullptr);

struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

MlpGradients zero_gradients(const Mlp& mlp);
void accumulate(MlpGradients& acc, const MlpGradients& g);

// dz holds dL/d(output) for the cached pass; returns dL/d(parameters).
MlpGradients backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& dz);

struct DeepEyEvaluation {
    double loss = 0.0;
    double reward = 0.0;
    double norm_penalty = 0.0;
    double orth_penalty = 0.0;
    std::vector<MlpGradients> grads;  // one per view
};

// Two-batch objective taken at the network outputs, differentiated through
// every layer. Only the pure variance metric is defined here, so alpha must
// be zero; with single linear layers this reduces exactly to the linear
// per-view gradients.
DeepEyEvaluation backward_ey(const std::vector<Mlp>& mlps, const MultiviewBatch& batch,
                             const MultiviewBatch& batch2, double alpha = 0.0);

struct DeepConfig {
    std::vector<std::size_t> widths;  // hidden widths; empty means linear nets
    std::size_t k = 1;                // output dimension per view
    bool tied = false;                // one parameter set shared by all views
    TrainConfig train;                // steps, batch size, optimizer, seed
};

struct DeepTraceRow {
    std::size_t step = 0;
    double loss = 0.0;
    double reward = 0.0;
    double norm_penalty = 0.0;
    double orth_penalty = 0.0;
    double tcc = 0.0;  // full-data score: top-K correlation sum for two views,
                       // matched pair-averaged correlation sum beyond two
};

struct DeepResult {
    std::vector<Mlp> models;           // one per view; identical objects when tied
    std::vector<DeepTraceRow> trace;   // per step pre-update, plus a final row
    double mcca_residual = 0.0;        // | -full loss - sum of squared top-K
                                       // correlations of the outputs | at the end
};

// Paired-batch gradient training of per-view networks. batch_size 0 uses the
// full data as both batches each step; otherwise both batches are drawn
// uniformly at random each step. Budget is train.steps; train.epochs must be
// zero. Tied mode requires equal view widths and sums the per-view gradients.
DeepResult train_deep(const MultiviewBatch& data, const DeepConfig& config);

}  // namespace gepey
