#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

enum class OptimizerKind { sgd, momentum, adam };

OptimizerKind optimizer_kind_from_name(const std::string& name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::sgd;
    double lr = 1e-2;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Owns the per-parameter moment buffers; one state per trained parameter list.
struct OptimizerState {
    OptimizerConfig config;
    std::size_t step_count = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;
};

OptimizerState make_optimizer(const OptimizerConfig& config, const std::vector<Matrix>& params);

// One update in place. SGD: p -= lr*g. Momentum: velocity accumulation.
// Adam: bias-corrected moments, p -= lr * m_hat / (sqrt(v_hat) + eps).
void step(OptimizerState& state, std::vector<Matrix>& params, const std::vector<Matrix>& grads);

// Matrix-free action of a pencil estimate on a tall block of columns. Batch
// backed implementations keep every update O(M K D).
using LinearOp = std::function<Matrix(const Matrix&)>;

// One subspace Hebbian step on the pencil (A, B) from independent estimates
// a_hat and a_hat2: W + lr * (2 a_hat W - 2 b_hat W (W^T a_hat2 W)).
// The rule ascends the trace objective, so the step is added; every other
// update in this project descends.
Matrix sgha_update(const Matrix& w, const LinearOp& a_hat, const LinearOp& b_hat,
                   const LinearOp& a_hat2, double lr);
Matrix sgha_update(const Matrix& w, const Matrix& a_hat, const Matrix& b_hat,
                   const Matrix& a_hat2, double lr);

// Auxiliary running averages of B W per column for the per-eigenvector game
// update; refreshed by exponential moving average at the given rate.
struct GammaEgState {
    Matrix aux;          // D x K, column i estimates B w_i
    double rate = 0.9;   // EMA keep-rate
    std::size_t step_count = 0;
};

GammaEgState make_gamma_eg_state(std::size_t d, std::size_t k, double rate = 0.9);

// Sequential per-column ascent: column i climbs its Rayleigh quotient
// numerator and is penalized toward B-orthogonality with the already-updated
// columns j < i, using the auxiliary averages wherever B appears. Each
// column is renormalized to unit Euclidean length afterwards.
// Throws ZeroColumn when a column cannot be renormalized.
Matrix gamma_eg_update(const Matrix& w, GammaEgState& state, const LinearOp& a_hat,
                       const LinearOp& b_hat2, double lr);
Matrix gamma_eg_update(const Matrix& w, GammaEgState& state, const Matrix& a_hat,
                       const Matrix& b_hat2, double lr);

}  // namespace gepey
